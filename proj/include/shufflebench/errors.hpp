#pragma once

#include <stdexcept>
#include <string>

namespace shufflebench {

// Invalid argument to a constructor or operation (bad dimensions, ranges,
// infeasible parameter combinations, malformed config values).
class parameter_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Component or sequence index outside its valid range.
class index_error : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// An explicit index sequence was exhausted before the requested iteration.
class sequence_length_error : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Iterate left the finite region during an SGD run; carries the failing step.
class divergence_error : public std::runtime_error {
 public:
  divergence_error(const std::string& what, long t)
      : std::runtime_error(what), t_(t) {}
  long t() const { return t_; }

 private:
  long t_;
};

// Iterative numerical routine failed to converge; carries the partial result.
class numerical_error : public std::runtime_error {
 public:
  numerical_error(const std::string& what, double partial)
      : std::runtime_error(what), partial_(partial) {}
  double partial_estimate() const { return partial_; }

 private:
  double partial_;
};

// Every stepsize in a tuning grid failed (diverged or never reached target).
class tuning_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config file problems (syntax or schema).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what, int line = 0)
      : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace shufflebench
