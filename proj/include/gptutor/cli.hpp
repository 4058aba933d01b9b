#pragma once

#include "gptutor/gateway.hpp"
#include "gptutor/service.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace gptutor::cli {

// Process-level dependencies, injectable for tests.
struct Environment {
  EnvLookup env = process_environment();
  BackendFactory backends = default_backend_factory();
  std::istream* in = nullptr;  // serve input; std::cin when null
};

// Subcommands: prompt, explain, index, serve. `args` excludes the program name.
// Exit codes: 0 success, 1 domain error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Environment& environment = {});

}  // namespace gptutor::cli
