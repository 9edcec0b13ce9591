#pragma once

#include <string>
#include <vector>

namespace mmorder::cli {

// Dispatches one CLI invocation. Exit codes: 0 success / relation holds,
// 1 negative verdict, 2 usage or runtime error.
int run(const std::vector<std::string>& args);

}  // namespace mmorder::cli
