#pragma once

#include <stdexcept>
#include <string>

namespace cotlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A sampled chain did not reach the stop symbol within max_len messages.
struct TruncationError : Error {
  using Error::Error;
};

// A conditional was requested given an event of probability zero.
struct ConditioningOnNullEvent : Error {
  using Error::Error;
};

// Skewness is undefined when some context has prior probability zero.
struct ZeroPriorContext : Error {
  using Error::Error;
};

// uniform-asserted mode was requested but the context prior is not uniform.
struct PriorNotUniform : Error {
  using Error::Error;
};

// A probability is too small to represent in linear space (log value is
// finite but exp underflows to zero).
struct UnderflowError : Error {
  using Error::Error;
};

}  // namespace cotlab
