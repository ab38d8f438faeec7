#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "p2p/coalition.hpp"
#include "p2p/conditions.hpp"
#include "p2p/config.hpp"

namespace p2p {

using Cell = std::variant<double, std::string>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct RunOutput {
    std::vector<Table> tables;
    ConditionReport conditions;
    std::optional<CoalitionGame> game;  // set by the game command
    int exit_code = 0;                  // 0 ok, 2 condition failures
};

enum class OutputFormat { csv, json };

struct CommandRequest {
    std::string command;                 // pareto | bowley | game | core-check |
                                         // tables | sweep | validate
    bool single_loading = false;         // bowley variant
    std::optional<double> jpo2_loading;  // overrides the config value
    std::optional<Vector> allocation;    // core-check payload
};

RunOutput run_command(const CommandRequest& request, const LoadedConfig& config);

/// Render deterministically. CSV: one `#table <name>` block per table,
/// comma-separated, LF endings, shortest round-trip numbers. JSON: stable key
/// order; the game command emits the canonical game export object.
std::string emit(const RunOutput& output, OutputFormat format);

}  // namespace p2p
