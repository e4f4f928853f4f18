#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace sfcast::cli {

// Entry point of the `sfcast` tool. Returns 0 on success; on failure writes
// {"error": <code>, "message": <text>} to `err` and returns nonzero.
int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);
int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

} // namespace sfcast::cli
