#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "p2p/market.hpp"

namespace p2p {

struct SweepSpec {
    std::string parameter;  // only "gamma_r" is supported
    double from = 0.0;
    double to = 0.0;
    std::size_t steps = 0;  // number of grid points
};

struct RunOptions {
    std::optional<double> jpo2_loading;  // single loading for the JPO2 contract
    std::optional<SweepSpec> sweep;
};

struct LoadedConfig {
    std::string schema_version;
    MarketParams params;
    RunOptions options;
};

/// Parse and validate a JSON market config. Throws ParseError on malformed
/// JSON and ValidationError (carrying the field path) on schema violations.
LoadedConfig parse_config(const std::string& text);

/// Read from a file path, or from stdin when the path is "-".
LoadedConfig load_config(const std::string& path);

}  // namespace p2p
