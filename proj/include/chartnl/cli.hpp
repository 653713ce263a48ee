#pragma once

#include "chartnl/llm_gateway.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace chartnl {

/// Settings shared by subcommands. A JSON config file supplies defaults and
/// command-line flags override it; the API key is only read from the
/// environment variable named in `model.api_key_env`.
struct RunConfig {
    ModelConfig model;
    std::uint64_t seed = 0;
    std::string output_dir = ".";
    unsigned workers = HttpGateway::kDefaultMaxInFlight;
    double span_percentile = 90.0;
    int grid = 10;
    int k = 3;
};

/// Reads a JSON config file. Unknown keys raise ConfigError.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(std::string_view json_text);

inline constexpr const char* kMockTimestamp = "1970-01-01T00:00:00Z";

/// Runs the command line `args` (without the program name). Returns 0 on
/// success, 1 on a domain error and 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chartnl
