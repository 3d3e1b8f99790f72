#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace shufflebench {

// Sparse binary-classification dataset in the LIBSVM text convention:
// one row per line, `<label> <index>:<value> ...`, indices 1-based and
// strictly increasing within a row.
struct Dataset {
  struct Feature {
    int index = 0;  // 1-based
    double value = 0.0;
    bool operator==(const Feature&) const = default;
  };
  struct Row {
    int label = 0;  // -1 or +1 after mapping
    std::vector<Feature> features;
    bool operator==(const Row&) const = default;
  };

  std::vector<Row> rows;
  int d = 0;  // max feature index (or an explicit override)

  int n() const { return static_cast<int>(rows.size()); }
  bool operator==(const Dataset&) const = default;
};

// Format-level failure with its position.
class libsvm_error : public std::runtime_error {
 public:
  enum class Kind { Malformed, NonMonotonicIndex, BadLabel, Empty };

  libsvm_error(Kind kind, const std::string& what, int line, int column)
      : std::runtime_error(what), kind_(kind), line_(line), column_(column) {}

  Kind kind() const { return kind_; }
  int line() const { return line_; }    // 1-based; 0 when not line-specific
  int column() const { return column_; }

 private:
  Kind kind_;
  int line_;
  int column_;
};

// Parses a LIBSVM text stream. `#` starts a comment; blank lines are skipped.
// Labels map {+1, 1} -> +1 and {-1, 0, 2} -> -1; anything else is an error.
Dataset parse_libsvm(std::istream& in);
Dataset parse_libsvm(const std::string& text);

// File loader; transparently inflates when the path ends in ".gz".
Dataset load_libsvm(const std::string& path);

// Canonical text form: labels as "+1"/"-1", values in shortest round-trip
// decimal. parse_libsvm(serialize_libsvm(ds)) == ds for any valid dataset.
std::string serialize_libsvm(const Dataset& ds);

struct DatasetStats {
  int n = 0;
  int d = 0;
  long nnz = 0;
  double class_balance = 0.0;    // fraction of +1 labels
  double max_row_norm_sq = 0.0;  // feeds the logistic smoothness constant
};

DatasetStats dataset_stats(const Dataset& ds);

// Seed-deterministic uniform subset of k rows, kept in file order; d is
// preserved so subsampling does not shrink the ambient dimension.
Dataset subsample_rows(const Dataset& ds, int k, std::uint64_t seed);

// Optional per-feature max-abs scaling (off by default everywhere).
Dataset scale_max_abs(const Dataset& ds);

}  // namespace shufflebench
