#include "p2p/run.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "closed_form.hpp"
#include "log.hpp"
#include "p2p/bowley.hpp"
#include "p2p/errors.hpp"
#include "p2p/pareto.hpp"

namespace p2p {

namespace {

std::string format_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string cell_text(const Cell& c) {
    if (std::holds_alternative<double>(c)) return format_number(std::get<double>(c));
    return std::get<std::string>(c);
}

std::string member_label(std::size_t i) { return std::to_string(i + 1); }

Table vector_table(std::string name, const std::string& value_column, const Vector& v) {
    Table t{std::move(name), {"member", value_column}, {}};
    for (std::size_t i = 0; i < v.size(); ++i)
        t.rows.push_back({Cell{member_label(i)}, Cell{v[i]}});
    return t;
}

Table matrix_table(std::string name, const Matrix& a) {
    Table t{std::move(name), {"member"}, {}};
    for (std::size_t j = 0; j < a.cols(); ++j)
        t.columns.push_back("share_" + member_label(j));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        std::vector<Cell> row{Cell{member_label(i)}};
        for (std::size_t j = 0; j < a.cols(); ++j) row.push_back(Cell{a(i, j)});
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table conditions_table(const ConditionReport& report) {
    Table t{"conditions", {"name", "verdict", "margin", "notes"}, {}};
    for (const auto& e : report.entries) {
        t.rows.push_back({Cell{e.name}, Cell{std::string(to_string(e.verdict))},
                          Cell{e.margin}, Cell{e.notes}});
    }
    return t;
}

struct NamedContract {
    std::string name;
    Contract contract;
};

struct BaselineContracts {
    ParetoSolution pareto;
    BowleySolution bo1;
    BowleySolution bo2;
    Matrix no_reinsurer;  // pool-only mutualization on the full member set
    Contract jpo1;
    Contract jpo2;
    double jpo2_loading;
    CoalitionGame game;
};

BaselineContracts build_baseline_contracts(const LoadedConfig& config,
                                           const std::optional<double>& jpo2_override) {
    const MarketParams& params = config.params;
    const std::size_t n = params.size();

    BaselineContracts out{solve_social_optimum(params), leader(params),
                          leader_single(params),        Matrix{},
                          Contract{},                   Contract{},
                          0.0,                          build_game(params)};

    const double k = detail::mean_projection_weight(params.expected_loss, params.covariance);
    out.no_reinsurer = detail::mutualization_for(params.expected_loss, params.covariance,
                                                 params.risk_aversion, Vector(n, 0.0), k);

    const Contract bo1_contract{out.bo1.mutualization, out.bo1.ceded, out.bo1.loading};
    out.jpo1 = equal_surplus_split(params, out.pareto, bo1_contract);

    if (jpo2_override) {
        out.jpo2_loading = *jpo2_override;
    } else if (config.options.jpo2_loading) {
        out.jpo2_loading = *config.options.jpo2_loading;
    } else {
        const Contract bo2_contract{out.bo2.mutualization, out.bo2.ceded, out.bo2.loading};
        const WelfareReport target = welfare(params, bo2_contract);
        const auto intervals =
            single_loading_feasible_set(params, out.pareto, out.game, target);
        if (intervals.empty()) {
            throw Error(
                "no feasible single loading dominates the single-loading leader contract; "
                "pass an explicit value");
        }
        out.jpo2_loading = 0.5 * (intervals.front().lo + intervals.front().hi);
        detail::log_info("jpo2 loading defaulted to feasible-interval midpoint " +
                         format_number(out.jpo2_loading));
    }
    out.jpo2 = Contract{out.pareto.mutualization, out.pareto.ceded,
                        Vector(n, out.jpo2_loading)};
    return out;
}

RunOutput run_pareto(const LoadedConfig& config) {
    const ParetoSolution sol = solve_social_optimum(config.params);
    RunOutput out;
    out.tables.push_back(vector_table("pareto_ceded", "ceded", sol.ceded));
    out.tables.push_back(matrix_table("pareto_mutualization", sol.mutualization));
    out.conditions.add(check_ceded_interior(config.params));
    return out;
}

RunOutput run_bowley(const LoadedConfig& config, bool single) {
    const BowleySolution sol =
        single ? leader_single(config.params) : leader(config.params);
    RunOutput out;
    out.tables.push_back(vector_table("bowley_loading", "loading", sol.loading));
    out.tables.push_back(vector_table("bowley_ceded", "ceded", sol.ceded));
    out.tables.push_back(matrix_table("bowley_mutualization", sol.mutualization));
    Table summary{"bowley_summary", {"reinsurer_gain"}, {}};
    summary.rows.push_back({Cell{sol.reinsurer_gain_closed_form}});
    out.tables.push_back(std::move(summary));
    out.conditions = sol.conditions;
    const ConditionEntry* ir_m = out.conditions.find("member_ir_direct");
    const ConditionEntry* ir_r = out.conditions.find("reinsurer_ir_direct");
    if ((ir_m && ir_m->verdict == Verdict::fail) || (ir_r && ir_r->verdict == Verdict::fail))
        out.exit_code = 2;
    return out;
}

RunOutput run_game(const LoadedConfig& config) {
    RunOutput out;
    out.game = build_game(config.params);
    Table t{"game_values", {"coalition", "members", "with_reinsurer", "worth"}, {}};
    for (std::uint32_t mask = 0; mask < out.game->worth.size(); ++mask) {
        std::string members;
        for (std::size_t i = 0; i < out.game->members; ++i) {
            if (mask & (1u << i)) {
                if (!members.empty()) members += '+';
                members += member_label(i);
            }
        }
        const bool with_r = mask & out.game->reinsurer_bit();
        t.rows.push_back({Cell{static_cast<double>(mask)},
                          Cell{members.empty() ? std::string("-") : members},
                          Cell{std::string(with_r ? "yes" : "no")},
                          Cell{out.game->worth[mask]}});
    }
    out.tables.push_back(std::move(t));
    return out;
}

RunOutput run_core_check(const LoadedConfig& config, const std::optional<Vector>& alloc_in) {
    if (!alloc_in) throw Error("core-check needs an allocation (comma-separated gains)");
    const CoalitionGame game = build_game(config.params);
    if (alloc_in->size() != game.members + 1)
        throw DimensionError("core-check: allocation needs one gain per member plus the reinsurer");
    const CoreCheck res = check_core(game, Allocation{*alloc_in});

    RunOutput out;
    Table t{"core_check", {"in_core", "efficiency_gap"}, {}};
    t.rows.push_back({Cell{std::string(res.in_core ? "yes" : "no")}, Cell{res.efficiency_gap}});
    out.tables.push_back(std::move(t));
    Table v{"core_violations", {"coalition", "slack"}, {}};
    for (const auto& viol : res.violated)
        v.rows.push_back({Cell{static_cast<double>(viol.coalition)}, Cell{viol.slack}});
    out.tables.push_back(std::move(v));
    if (!res.in_core) out.exit_code = 2;
    return out;
}

RunOutput run_tables(const LoadedConfig& config, const std::optional<double>& jpo2_override) {
    const MarketParams& params = config.params;
    const std::size_t n = params.size();
    const BaselineContracts base = build_baseline_contracts(config, jpo2_override);

    const Contract bo1{base.bo1.mutualization, base.bo1.ceded, base.bo1.loading};
    const Contract bo2{base.bo2.mutualization, base.bo2.ceded, base.bo2.loading};
    const Contract no_re{base.no_reinsurer, Vector(n, 0.0), Vector(n, 0.0)};

    RunOutput out;

    Table loadings{"safety_loadings", {"contract"}, {}};
    for (std::size_t i = 0; i < n; ++i) loadings.columns.push_back("eta_" + member_label(i));
    auto loading_row = [&](const std::string& name, const Vector& eta) {
        std::vector<Cell> row{Cell{name}};
        for (double e : eta) row.push_back(Cell{e});
        loadings.rows.push_back(std::move(row));
    };
    loading_row("JPO1", base.jpo1.loading);
    loading_row("JPO2", base.jpo2.loading);
    loading_row("BO1", bo1.loading);
    loading_row("BO2", bo2.loading);
    out.tables.push_back(std::move(loadings));

    Table ceded{"reinsurance", {"contract"}, {}};
    for (std::size_t i = 0; i < n; ++i) ceded.columns.push_back("p_" + member_label(i));
    auto ceded_row = [&](const std::string& name, const Vector& p) {
        std::vector<Cell> row{Cell{name}};
        for (double v : p) row.push_back(Cell{v});
        ceded.rows.push_back(std::move(row));
    };
    ceded_row("JPO", base.pareto.ceded);
    ceded_row("BO1", bo1.ceded);
    ceded_row("BO2", bo2.ceded);
    out.tables.push_back(std::move(ceded));

    out.tables.push_back(matrix_table("mutualization_jpo", base.pareto.mutualization));
    out.tables.push_back(matrix_table("mutualization_no_reinsurer", base.no_reinsurer));
    out.tables.push_back(matrix_table("mutualization_bo1", bo1.mutualization));
    out.tables.push_back(matrix_table("mutualization_bo2", bo2.mutualization));

    Table premiums{"premiums", {"contract"}, {}};
    for (std::size_t i = 0; i < n; ++i) premiums.columns.push_back("premium_" + member_label(i));
    premiums.columns.push_back("total");
    auto premium_row = [&](const std::string& name, const Contract& c) {
        const Evaluation ev = evaluate(params, c);
        std::vector<Cell> row{Cell{name}};
        for (double v : ev.premiums) row.push_back(Cell{v});
        row.push_back(Cell{sum(ev.premiums)});
        premiums.rows.push_back(std::move(row));
    };
    premium_row("JPO1", base.jpo1);
    premium_row("JPO2", base.jpo2);
    premium_row("BO1", bo1);
    premium_row("BO2", bo2);
    out.tables.push_back(std::move(premiums));

    Table disutility{"disutilities", {"contract"}, {}};
    for (std::size_t i = 0; i < n; ++i) disutility.columns.push_back("rho_" + member_label(i));
    disutility.columns.push_back("rho_r");
    auto disutility_row = [&](const std::string& name, const Contract& c, bool has_reinsurer) {
        const Evaluation ev = evaluate(params, c);
        std::vector<Cell> row{Cell{name}};
        for (double v : ev.member_disutility) row.push_back(Cell{v});
        row.push_back(has_reinsurer ? Cell{ev.reinsurer_disutility} : Cell{std::string("n/a")});
        disutility.rows.push_back(std::move(row));
    };
    disutility_row("status_quo", Contract{Matrix::identity(n), Vector(n, 0.0), Vector(n, 0.0)},
                   true);
    disutility_row("no_reinsurer", no_re, false);
    disutility_row("JPO", base.jpo1, true);
    disutility_row("BO1", bo1, true);
    disutility_row("BO2", bo2, true);
    out.tables.push_back(std::move(disutility));

    Table gains{"welfare_gains", {"contract"}, {}};
    for (std::size_t i = 0; i < n; ++i) gains.columns.push_back("omega_" + member_label(i));
    gains.columns.push_back("omega_r");
    gains.columns.push_back("total");
    auto gain_row = [&](const std::string& name, const Contract& c, bool has_reinsurer) {
        const WelfareReport w = welfare(params, c);
        std::vector<Cell> row{Cell{name}};
        for (double v : w.member_gains) row.push_back(Cell{v});
        if (has_reinsurer) {
            row.push_back(Cell{w.reinsurer_gain});
            row.push_back(Cell{w.total});
        } else {
            row.push_back(Cell{std::string("n/a")});
            row.push_back(Cell{sum(w.member_gains)});
        }
        gains.rows.push_back(std::move(row));
    };
    gain_row("no_reinsurer", no_re, false);
    gain_row("JPO1", base.jpo1, true);
    gain_row("JPO2", base.jpo2, true);
    gain_row("BO1", bo1, true);
    gain_row("BO2", bo2, true);
    out.tables.push_back(std::move(gains));

    return out;
}

RunOutput run_sweep(const LoadedConfig& config) {
    const SweepSpec spec = config.options.sweep.value_or(SweepSpec{"gamma_r", 0.0, 0.029, 30});
    const std::size_t n = config.params.size();

    Table t{"sweep", {"gamma_r"}, {}};
    for (std::size_t i = 0; i < n; ++i) t.columns.push_back("jpo_p_" + member_label(i));
    for (std::size_t i = 0; i < n; ++i) t.columns.push_back("bo1_p_" + member_label(i));
    for (std::size_t i = 0; i < n; ++i) t.columns.push_back("bo2_p_" + member_label(i));
    t.columns.push_back("jpo_total_welfare");
    t.columns.push_back("bo1_total_welfare");
    t.columns.push_back("bo2_total_welfare");

    for (std::size_t s = 0; s < spec.steps; ++s) {
        const double gr = spec.steps == 1
                              ? spec.from
                              : spec.from + (spec.to - spec.from) * static_cast<double>(s) /
                                    static_cast<double>(spec.steps - 1);
        const MarketParams params = MarketParams::validated(
            config.params.expected_loss, config.params.covariance,
            config.params.risk_aversion, gr);

        const ParetoSolution jpo = solve_social_optimum(params);
        const BowleySolution bo1 = leader(params);
        const BowleySolution bo2 = leader_single(params);

        const double base = status_quo_disutility(params);
        auto total = [&](const Matrix& a, const Vector& p) {
            return base - sum(member_disutility(params, a)) - reinsurer_disutility(params, p);
        };

        std::vector<Cell> row{Cell{gr}};
        for (double v : jpo.ceded) row.push_back(Cell{v});
        for (double v : bo1.ceded) row.push_back(Cell{v});
        for (double v : bo2.ceded) row.push_back(Cell{v});
        row.push_back(Cell{total(jpo.mutualization, jpo.ceded)});
        row.push_back(Cell{total(bo1.mutualization, bo1.ceded)});
        row.push_back(Cell{total(bo2.mutualization, bo2.ceded)});
        t.rows.push_back(std::move(row));
    }

    RunOutput out;
    out.tables.push_back(std::move(t));
    return out;
}

RunOutput run_validate(const LoadedConfig& config) {
    const MarketParams& params = config.params;
    RunOutput out;

    out.conditions.add(check_ceded_interior(params));
    out.conditions.add(check_nonneg_loading_margin(params));

    const BowleySolution bo1 = leader(params);
    out.conditions.add(bo1.conditions.entries);

    const BowleySolution bo2 = leader_single(params);
    if (const ConditionEntry* single = bo2.conditions.find("single_loading_nonneg_margin"))
        out.conditions.add(*single);

    out.conditions.add(loading_bound_report(params));

    const ParetoSolution sol = solve_social_optimum(params);
    const CoalitionGame game = build_game(params);
    out.conditions.add(check_marginal_contribution_bound(params, sol, game));

    ConditionEntry note;
    note.name = "single_loading_interval_note";
    note.verdict = Verdict::inconclusive;
    note.notes =
        "the closed-interval construction for a common loading needs the minimum of one "
        "core loading vector to exceed the maximum of the other; the feasible set here is "
        "computed by direct scan instead";
    out.conditions.add(std::move(note));

    if (out.conditions.any_failed()) out.exit_code = 2;
    return out;
}

}  // namespace

RunOutput run_command(const CommandRequest& request, const LoadedConfig& config) {
    detail::log_debug("running command " + request.command);
    if (request.command == "pareto") return run_pareto(config);
    if (request.command == "bowley") return run_bowley(config, request.single_loading);
    if (request.command == "game") return run_game(config);
    if (request.command == "core-check") return run_core_check(config, request.allocation);
    if (request.command == "tables") return run_tables(config, request.jpo2_loading);
    if (request.command == "sweep") return run_sweep(config);
    if (request.command == "validate") return run_validate(config);
    throw Error("unknown command: " + request.command);
}

namespace {

std::string emit_csv(const RunOutput& output) {
    std::string text;
    bool first = true;
    auto emit_table = [&](const Table& t) {
        if (!first) text += '\n';
        first = false;
        text += "#table " + t.name + "\n";
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            if (c) text += ',';
            text += t.columns[c];
        }
        text += '\n';
        for (const auto& row : t.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) text += ',';
                text += cell_text(row[c]);
            }
            text += '\n';
        }
    };
    for (const auto& t : output.tables) emit_table(t);
    if (!output.conditions.entries.empty()) emit_table(conditions_table(output.conditions));
    return text;
}

nlohmann::ordered_json game_json(const CoalitionGame& game) {
    nlohmann::ordered_json j;
    j["n"] = game.members;
    nlohmann::ordered_json values = nlohmann::ordered_json::object();
    for (std::uint32_t mask = 0; mask < game.worth.size(); ++mask)
        values[std::to_string(mask)] = game.worth[mask];
    j["values"] = std::move(values);
    return j;
}

std::string emit_json(const RunOutput& output) {
    // the game command's JSON form is exactly the canonical export object
    if (output.game) return game_json(*output.game).dump(2) + "\n";

    nlohmann::ordered_json j;
    nlohmann::ordered_json tables = nlohmann::ordered_json::object();
    for (const auto& t : output.tables) {
        nlohmann::ordered_json jt;
        jt["columns"] = t.columns;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& row : t.rows) {
            nlohmann::ordered_json jr = nlohmann::ordered_json::array();
            for (const auto& cell : row) {
                if (std::holds_alternative<double>(cell))
                    jr.push_back(std::get<double>(cell));
                else
                    jr.push_back(std::get<std::string>(cell));
            }
            rows.push_back(std::move(jr));
        }
        jt["rows"] = std::move(rows);
        tables[t.name] = std::move(jt);
    }
    j["tables"] = std::move(tables);

    nlohmann::ordered_json conditions = nlohmann::ordered_json::array();
    for (const auto& e : output.conditions.entries) {
        nlohmann::ordered_json je;
        je["name"] = e.name;
        je["verdict"] = std::string(to_string(e.verdict));
        je["margin"] = e.margin;
        je["slacks"] = e.slacks;
        je["notes"] = e.notes;
        conditions.push_back(std::move(je));
    }
    j["conditions"] = std::move(conditions);
    return j.dump(2) + "\n";
}

}  // namespace

std::string emit(const RunOutput& output, OutputFormat format) {
    return format == OutputFormat::csv ? emit_csv(output) : emit_json(output);
}

}  // namespace p2p
