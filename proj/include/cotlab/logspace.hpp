#pragma once

#include <cmath>
#include <limits>

#include "cotlab/errors.hpp"

namespace cotlab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without leaving log space.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// Streaming logsumexp. Terms are added in caller order; the running maximum
// is used as the scale, so no second pass over the terms is needed.
class LogSumAcc {
 public:
  void add(double log_term) {
    if (log_term == kNegInf) return;
    if (log_term <= max_) {
      sum_ += std::exp(log_term - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    }
  }

  bool empty() const { return sum_ == 0.0; }

  double log_total() const {
    return sum_ == 0.0 ? kNegInf : max_ + std::log(sum_);
  }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

// Converts a log probability to linear space. A log value that is finite but
// below the representable range signals that the caller asked for a quantity
// only meaningful in log space, so we refuse rather than return 0.
inline double to_linear(double log_p) {
  if (log_p == kNegInf) return 0.0;
  double p = std::exp(log_p);
  if (p == 0.0) {
    throw UnderflowError("probability underflows double precision (log value " +
                         std::to_string(log_p) + ")");
  }
  return p;
}

}  // namespace cotlab
