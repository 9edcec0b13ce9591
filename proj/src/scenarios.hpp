#pragma once

#include <string>

namespace mmorder::cli {

// Named, seeded reproduction scenarios. Returns 0 when every check in the
// scenario passes, 1 otherwise.
int run_scenario(const std::string& name);

// Space-separated list for help output.
std::string scenario_names();

}  // namespace mmorder::cli
