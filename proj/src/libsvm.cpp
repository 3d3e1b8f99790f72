#include "shufflebench/libsvm.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <sstream>
#include <string_view>

#include "shufflebench/rng.hpp"

namespace shufflebench {

namespace {

[[noreturn]] void fail(libsvm_error::Kind kind, const std::string& msg,
                       int line, int col) {
  std::ostringstream os;
  os << "libsvm: " << msg << " (line " << line << ", column " << col << ")";
  throw libsvm_error(kind, os.str(), line, col);
}

bool parse_double(std::string_view token, double& out) {
  // from_chars rejects a leading '+', which labels like "+1" carry
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return false;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_int(std::string_view token, int& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

// Maps the label conventions seen across the LIBSVM binary sets
// (australian/a9a use +-1, some sets use 0 or 2 for the negative class).
int map_label(double raw, int line, int col) {
  if (raw == 1.0) return +1;
  if (raw == -1.0 || raw == 0.0 || raw == 2.0) return -1;
  fail(libsvm_error::Kind::BadLabel,
       "unmappable label " + std::to_string(raw), line, col);
}

void append_shortest(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

Dataset parse_libsvm(std::istream& in) {
  Dataset ds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }

    std::size_t pos = 0;
    auto skip_ws = [&] {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t'))
        ++pos;
    };
    auto next_token = [&]() -> std::string_view {
      skip_ws();
      const std::size_t start = pos;
      while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
      return std::string_view(line).substr(start, pos - start);
    };

    const std::string_view label_tok = next_token();
    if (label_tok.empty()) continue;  // blank or comment-only line
    const int label_col = static_cast<int>(pos - label_tok.size()) + 1;

    double raw_label = 0.0;
    if (!parse_double(label_tok, raw_label)) {
      fail(libsvm_error::Kind::Malformed,
           "bad label token '" + std::string(label_tok) + "'", line_no,
           label_col);
    }

    Dataset::Row row;
    row.label = map_label(raw_label, line_no, label_col);

    int prev_index = 0;
    for (;;) {
      const std::string_view tok = next_token();
      if (tok.empty()) break;
      const int col = static_cast<int>(pos - tok.size()) + 1;

      const std::size_t colon = tok.find(':');
      if (colon == std::string_view::npos || colon == 0 ||
          colon + 1 == tok.size()) {
        fail(libsvm_error::Kind::Malformed,
             "bad feature token '" + std::string(tok) + "'", line_no, col);
      }
      int index = 0;
      double value = 0.0;
      if (!parse_int(tok.substr(0, colon), index) || index < 1) {
        fail(libsvm_error::Kind::Malformed,
             "bad feature index in '" + std::string(tok) + "'", line_no, col);
      }
      if (!parse_double(tok.substr(colon + 1), value) ||
          !std::isfinite(value)) {
        fail(libsvm_error::Kind::Malformed,
             "bad feature value in '" + std::string(tok) + "'", line_no, col);
      }
      if (index <= prev_index) {
        fail(libsvm_error::Kind::NonMonotonicIndex,
             "feature indices must be strictly increasing", line_no, col);
      }
      prev_index = index;
      row.features.push_back({index, value});
      if (index > ds.d) ds.d = index;
    }
    ds.rows.push_back(std::move(row));
  }

  if (ds.rows.empty()) {
    throw libsvm_error(libsvm_error::Kind::Empty, "libsvm: empty dataset", 0,
                       0);
  }
  return ds;
}

Dataset parse_libsvm(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

Dataset load_libsvm(const std::string& path) {
  if (path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
    gzFile gz = gzopen(path.c_str(), "rb");
    if (gz == nullptr) {
      throw libsvm_error(libsvm_error::Kind::Malformed,
                         "libsvm: cannot open " + path, 0, 0);
    }
    std::string text;
    char buf[1 << 16];
    int got = 0;
    while ((got = gzread(gz, buf, sizeof(buf))) > 0) {
      text.append(buf, static_cast<std::size_t>(got));
    }
    const bool read_error = got < 0;
    gzclose(gz);
    if (read_error) {
      throw libsvm_error(libsvm_error::Kind::Malformed,
                         "libsvm: gzip read error in " + path, 0, 0);
    }
    return parse_libsvm(text);
  }

  std::ifstream in(path);
  if (!in) {
    throw libsvm_error(libsvm_error::Kind::Malformed,
                       "libsvm: cannot open " + path, 0, 0);
  }
  return parse_libsvm(in);
}

std::string serialize_libsvm(const Dataset& ds) {
  std::string out;
  for (const auto& row : ds.rows) {
    out += (row.label > 0) ? "+1" : "-1";
    for (const auto& f : row.features) {
      out += ' ';
      out += std::to_string(f.index);
      out += ':';
      append_shortest(out, f.value);
    }
    out += '\n';
  }
  return out;
}

DatasetStats dataset_stats(const Dataset& ds) {
  DatasetStats st;
  st.n = ds.n();
  st.d = ds.d;
  int positives = 0;
  for (const auto& row : ds.rows) {
    if (row.label > 0) ++positives;
    st.nnz += static_cast<long>(row.features.size());
    double norm_sq = 0.0;
    for (const auto& f : row.features) norm_sq += f.value * f.value;
    if (norm_sq > st.max_row_norm_sq) st.max_row_norm_sq = norm_sq;
  }
  st.class_balance =
      st.n > 0 ? static_cast<double>(positives) / static_cast<double>(st.n)
               : 0.0;
  return st;
}

Dataset subsample_rows(const Dataset& ds, int k, std::uint64_t seed) {
  if (k < 1 || k > ds.n()) {
    throw libsvm_error(libsvm_error::Kind::Empty,
                       "libsvm: subsample size out of range", 0, 0);
  }
  // Partial Fisher-Yates over row ids, then restore file order.
  std::vector<int> ids(static_cast<std::size_t>(ds.n()));
  for (int i = 0; i < ds.n(); ++i) ids[static_cast<std::size_t>(i)] = i;
  rng::Stream stream(rng::derive(seed, 0x5B5E7ULL));
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(stream.next_below(
                           static_cast<std::uint64_t>(ds.n() - i)));
    std::swap(ids[static_cast<std::size_t>(i)],
              ids[static_cast<std::size_t>(j)]);
  }
  ids.resize(static_cast<std::size_t>(k));
  std::sort(ids.begin(), ids.end());

  Dataset out;
  out.d = ds.d;
  out.rows.reserve(static_cast<std::size_t>(k));
  for (int id : ids) out.rows.push_back(ds.rows[static_cast<std::size_t>(id)]);
  return out;
}

Dataset scale_max_abs(const Dataset& ds) {
  std::vector<double> max_abs(static_cast<std::size_t>(ds.d) + 1, 0.0);
  for (const auto& row : ds.rows) {
    for (const auto& f : row.features) {
      const double a = std::fabs(f.value);
      auto& m = max_abs[static_cast<std::size_t>(f.index)];
      if (a > m) m = a;
    }
  }
  Dataset out = ds;
  for (auto& row : out.rows) {
    for (auto& f : row.features) {
      const double m = max_abs[static_cast<std::size_t>(f.index)];
      if (m > 0.0) f.value /= m;
    }
  }
  return out;
}

}  // namespace shufflebench
