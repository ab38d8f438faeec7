#include "p2p/coalition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "closed_form.hpp"
#include "p2p/errors.hpp"

namespace p2p {

namespace {

struct Slice {
    Vector mu;
    Matrix sigma;
    Vector gamma;
    std::vector<std::size_t> index;
};

Slice take(const MarketParams& params, std::uint32_t member_mask) {
    Slice s;
    for (std::size_t i = 0; i < params.size(); ++i)
        if (member_mask & (1u << i)) s.index.push_back(i);
    const std::size_t m = s.index.size();
    s.mu.resize(m);
    s.gamma.resize(m);
    s.sigma = Matrix(m, m);
    for (std::size_t a = 0; a < m; ++a) {
        s.mu[a] = params.expected_loss[s.index[a]];
        s.gamma[a] = params.risk_aversion[s.index[a]];
        for (std::size_t b = 0; b < m; ++b)
            s.sigma(a, b) = params.covariance(s.index[a], s.index[b]);
    }
    return s;
}

double slice_value(const Slice& s, double gamma_r, bool with_reinsurer) {
    const std::size_t m = s.mu.size();
    double status_quo = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        status_quo += s.mu[i] + 0.5 * s.gamma[i] * s.sigma(i, i);

    const double k = detail::mean_projection_weight(s.mu, s.sigma);
    Vector ceded(m, 0.0);
    double reinsurer_cost = 0.0;
    if (with_reinsurer) {
        const Matrix mbar = detail::system_matrix(s.mu, s.sigma, s.gamma, gamma_r, k);
        ceded = detail::social_ceded(mbar, s.sigma, gamma_r);
        reinsurer_cost = dot(s.mu, ceded) + 0.5 * gamma_r * dot(ceded, s.sigma * ceded);
    }
    const Matrix a = detail::mutualization_for(s.mu, s.sigma, s.gamma, ceded, k);

    double members_cost = 0.0;
    const Vector am = a * s.mu;
    for (std::size_t i = 0; i < m; ++i) {
        double q = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            double t = 0.0;
            for (std::size_t l = 0; l < m; ++l) t += s.sigma(j, l) * a(i, l);
            q += a(i, j) * t;
        }
        members_cost += am[i] + 0.5 * s.gamma[i] * q;
    }
    return status_quo - members_cost - reinsurer_cost;
}

}  // namespace

double coalition_value(const MarketParams& params, std::uint32_t member_mask,
                       bool with_reinsurer) {
    if (member_mask == 0) {
        if (!with_reinsurer)
            throw EmptyCoalitionError("coalition_value: empty coalition has no worth");
        return 0.0;  // the reinsurer alone gains nothing
    }
    const Slice s = take(params, member_mask);
    if (s.index.size() == 1 && !with_reinsurer) return 0.0;  // identity is the only option
    return slice_value(s, params.reinsurer_risk_aversion, with_reinsurer);
}

CoalitionGame build_game(const MarketParams& params) {
    const std::size_t n = params.size();
    if (n > 16) throw TooManyMembersError("build_game: more than 16 members");
    CoalitionGame game;
    game.members = n;
    game.worth.resize(std::size_t{1} << (n + 1));
    const std::uint32_t member_all = (1u << n) - 1u;
    for (std::uint32_t mask = 0; mask < game.worth.size(); ++mask) {
        const bool with_r = mask & game.reinsurer_bit();
        const std::uint32_t members_part = mask & member_all;
        game.worth[mask] = (members_part == 0 && !with_r)
                               ? 0.0
                               : (members_part == 0 ? 0.0
                                                    : coalition_value(params, members_part, with_r));
    }

    // numerically verify the structural inequalities the game must satisfy
    const double tol = 1e-7 * std::max(1.0, game.worth[game.grand_mask()]);
    for (std::uint32_t mask = 0; mask <= member_all; ++mask) {
        if (game.worth[mask] < -tol)
            throw Error("build_game: negative coalition worth");
        if (game.worth[mask | game.reinsurer_bit()] < game.worth[mask] - tol)
            throw Error("build_game: adding the reinsurer reduced a coalition's worth");
    }
    return game;
}

CoreCheck check_core(const CoalitionGame& game, const Allocation& alloc) {
    const std::size_t n = game.members;
    if (alloc.gains.size() != n + 1)
        throw DimensionError("check_core: allocation length must be members + 1");

    const double grand = game.worth[game.grand_mask()];
    CoreCheck res;
    res.efficiency_gap = sum(alloc.gains) - grand;
    bool efficient = std::abs(res.efficiency_gap) <= 1e-7 * std::max(1.0, std::abs(grand));

    for (std::uint32_t mask = 1; mask < game.grand_mask(); ++mask) {
        double total = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            if (mask & (1u << i)) total += alloc.gains[i];
        const double slack = total - game.worth[mask];
        if (slack < -1e-9) res.violated.push_back({mask, slack});
    }
    std::sort(res.violated.begin(), res.violated.end(),
              [](const CoreViolation& a, const CoreViolation& b) { return a.slack < b.slack; });
    res.in_core = efficient && res.violated.empty();
    return res;
}

namespace {

// Phase-1 simplex with Bland's rule on the dense tableau
//   sum_{i in C} c_i - s_C = worth(C)   for every proper nonempty coalition,
//   sum_i c_i = worth(grand),           all variables nonnegative.
class Phase1Simplex {
public:
    explicit Phase1Simplex(const CoalitionGame& game) {
        n_ = game.members + 1;                       // structural c variables
        const std::uint32_t grand = game.grand_mask();
        m_ = static_cast<std::size_t>(grand) - 1;    // proper nonempty coalitions
        rows_ = m_ + 1;
        surplus_ = m_;
        cols_ = n_ + surplus_ + rows_;  // c | surplus | artificial
        t_.assign(rows_, std::vector<double>(cols_ + 1, 0.0));
        basis_.resize(rows_);

        std::size_t r = 0;
        for (std::uint32_t mask = 1; mask < grand; ++mask, ++r) {
            for (std::size_t i = 0; i < n_; ++i)
                if (mask & (1u << i)) t_[r][i] = 1.0;
            t_[r][n_ + r] = -1.0;  // surplus
            t_[r][cols_] = game.worth[mask];
        }
        for (std::size_t i = 0; i < n_; ++i) t_[rows_ - 1][i] = 1.0;
        t_[rows_ - 1][cols_] = game.worth[grand];

        for (std::size_t rr = 0; rr < rows_; ++rr) {
            t_[rr][n_ + surplus_ + rr] = 1.0;
            basis_[rr] = n_ + surplus_ + rr;
        }
    }

    // minimize the artificial total; returns the residual
    double run() {
        // reduced costs: obj[j] = -(column sum over rows), artificial columns start at 0
        std::vector<double> obj(cols_ + 1, 0.0);
        for (std::size_t j = 0; j < n_ + surplus_; ++j)
            for (std::size_t r = 0; r < rows_; ++r) obj[j] -= t_[r][j];
        for (std::size_t r = 0; r < rows_; ++r) obj[cols_] -= t_[r][cols_];

        const double eps = 1e-11;
        while (true) {
            std::size_t enter = cols_;
            for (std::size_t j = 0; j < n_ + surplus_; ++j) {  // Bland: smallest index
                if (obj[j] < -eps) {
                    enter = j;
                    break;
                }
            }
            if (enter == cols_) break;

            std::size_t leave = rows_;
            double best = 0.0;
            for (std::size_t r = 0; r < rows_; ++r) {
                if (t_[r][enter] > eps) {
                    const double ratio = t_[r][cols_] / t_[r][enter];
                    if (leave == rows_ || ratio < best - eps ||
                        (std::abs(ratio - best) <= eps && basis_[r] < basis_[leave])) {
                        leave = r;
                        best = ratio;
                    }
                }
            }
            if (leave == rows_) break;  // unbounded cannot happen in phase 1

            pivot(leave, enter, obj);
        }
        return -obj[cols_];
    }

    Vector solution() const {
        Vector c(n_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r)
            if (basis_[r] < n_) c[basis_[r]] = t_[r][cols_];
        return c;
    }

private:
    void pivot(std::size_t leave, std::size_t enter, std::vector<double>& obj) {
        const double piv = t_[leave][enter];
        for (double& v : t_[leave]) v /= piv;
        for (std::size_t r = 0; r < rows_; ++r) {
            if (r == leave) continue;
            const double f = t_[r][enter];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) t_[r][j] -= f * t_[leave][j];
        }
        const double f = obj[enter];
        if (f != 0.0)
            for (std::size_t j = 0; j <= cols_; ++j) obj[j] -= f * t_[leave][j];
        basis_[leave] = enter;
    }

    std::size_t n_ = 0, m_ = 0, rows_ = 0, surplus_ = 0, cols_ = 0;
    std::vector<std::vector<double>> t_;
    std::vector<std::size_t> basis_;
};

}  // namespace

Allocation find_core_element(const CoalitionGame& game) {
    Phase1Simplex lp(game);
    const double residual = lp.run();
    const double grand = game.worth[game.grand_mask()];
    if (residual > 1e-7 * std::max(1.0, grand)) {
        throw InfeasibleError(
            "find_core_element: core polytope numerically empty (phase-1 residual " +
                std::to_string(residual) + ")",
            residual);
    }
    return Allocation{lp.solution()};
}

ConditionEntry check_marginal_contribution_bound(const MarketParams& params,
                                                 const ParetoSolution& sol,
                                                 const CoalitionGame& game) {
    const std::size_t n = params.size();
    const Vector eta_min = minimal_loading(params, sol.ceded);
    const Contract floor_contract{sol.mutualization, sol.ceded, eta_min};
    const WelfareReport w = welfare(params, floor_contract);

    const double grand = game.worth[game.grand_mask()];
    const std::uint32_t member_all = (1u << n) - 1u;
    Vector slacks(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t without_i = (member_all & ~(1u << i)) | game.reinsurer_bit();
        const double marginal = grand - game.worth[without_i];
        slacks[i] = w.member_gains[i] - marginal;
    }
    return make_entry("marginal_contribution_bound", std::move(slacks), /*strict=*/false);
}

StabilityCheck check_stability(const MarketParams& params, const CoalitionGame& game,
                               const Contract& contract) {
    const ParetoSolution sol = solve_social_optimum(params);
    const double gap =
        std::max(inf_norm(contract.mutualization - sol.mutualization),
                 inf_norm(sub(contract.ceded, sol.ceded)));
    if (gap > 1e-7) return {false, std::nullopt};  // not a social optimum

    const WelfareReport w = welfare(params, contract);
    Allocation alloc;
    alloc.gains = w.member_gains;
    alloc.gains.push_back(game.worth[game.grand_mask()] - sum(w.member_gains));
    const CoreCheck core = check_core(game, alloc);
    if (core.in_core) return {true, std::nullopt};
    return {false, core.violated.empty() ? std::nullopt
                                         : std::optional<std::uint32_t>(core.violated.front().coalition)};
}

std::string to_json(const CoalitionGame& game) {
    nlohmann::ordered_json j;
    j["n"] = game.members;
    nlohmann::ordered_json values = nlohmann::ordered_json::object();
    for (std::uint32_t mask = 0; mask < game.worth.size(); ++mask)
        values[std::to_string(mask)] = game.worth[mask];
    j["values"] = std::move(values);
    return j.dump();
}

}  // namespace p2p
