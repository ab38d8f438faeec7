// Command-line front end: computes cooperative (Pareto) and leader-follower
// (Bowley) peer-to-peer insurance contracts from a JSON market description
// and emits reproducible tables, sweeps and condition reports.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "p2p/config.hpp"
#include "p2p/errors.hpp"
#include "p2p/run.hpp"

namespace {

p2p::Vector parse_allocation(const std::string& text) {
    p2p::Vector v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            v.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw p2p::Error("core-check: cannot parse allocation entry '" + item + "'");
        }
    }
    return v;
}

int write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        return 0;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot open output file " << out_path << "\n";
        return 1;
    }
    out << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Game-theoretic peer-to-peer insurance contracts"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand

    std::string config_path;
    std::string format = "csv";
    std::string out_path;
    double jpo2_t = -1.0;
    bool jpo2_t_set = false;
    bool single_loading = false;
    std::string allocation_text;

    app.add_option("--config", config_path, "market config JSON (\"-\" for stdin)")
        ->required();
    app.add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", out_path, "output path (default: stdout)");

    CLI::App* cmd_pareto = app.add_subcommand("pareto", "cooperative risk allocation");
    CLI::App* cmd_bowley = app.add_subcommand("bowley", "leader-follower contract");
    cmd_bowley->add_flag("--single-loading", single_loading,
                         "restrict the reinsurer to one common loading");
    CLI::App* cmd_game = app.add_subcommand("game", "coalition game values");
    CLI::App* cmd_core = app.add_subcommand("core-check", "test an allocation against the core");
    cmd_core->add_option("allocation", allocation_text,
                         "comma-separated gains, members first then the reinsurer")
        ->required();
    CLI::App* cmd_tables = app.add_subcommand("tables", "all baseline contract tables");
    cmd_tables
        ->add_option("--jpo2-t", jpo2_t, "common loading for the JPO2 contract")
        ->check(CLI::NonNegativeNumber);
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "reinsurer risk-aversion sweep");
    CLI::App* cmd_validate = app.add_subcommand("validate", "full condition report");

    CLI11_PARSE(app, argc, argv);
    jpo2_t_set = cmd_tables->count("--jpo2-t") > 0;

    p2p::CommandRequest request;
    if (cmd_pareto->parsed()) request.command = "pareto";
    if (cmd_bowley->parsed()) request.command = "bowley";
    if (cmd_game->parsed()) request.command = "game";
    if (cmd_core->parsed()) request.command = "core-check";
    if (cmd_tables->parsed()) request.command = "tables";
    if (cmd_sweep->parsed()) request.command = "sweep";
    if (cmd_validate->parsed()) request.command = "validate";
    request.single_loading = single_loading;
    if (jpo2_t_set) request.jpo2_loading = jpo2_t;

    try {
        if (!allocation_text.empty()) request.allocation = parse_allocation(allocation_text);
        const p2p::LoadedConfig config = p2p::load_config(config_path);
        const p2p::RunOutput output = p2p::run_command(request, config);
        const auto fmt = format == "json" ? p2p::OutputFormat::json : p2p::OutputFormat::csv;
        const int write_rc = write_output(p2p::emit(output, fmt), out_path);
        return write_rc != 0 ? write_rc : output.exit_code;
    } catch (const p2p::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
