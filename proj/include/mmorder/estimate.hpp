#pragma once

#include <cstdint>

namespace mmorder {

// A Monte Carlo result: point value, standard error of the mean, and the
// seed/replicate count it is reproducible from.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  long reps = 0;
  std::uint64_t seed = 0;
};

}  // namespace mmorder
