#include "p2p/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "closed_form.hpp"
#include "p2p/coalition.hpp"
#include "p2p/errors.hpp"

namespace p2p {

namespace {

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

ParetoSolution solve_social_optimum(const MarketParams& params) {
    const Vector& mu = params.expected_loss;
    const Matrix& sigma = params.covariance;
    const Vector& gamma = params.risk_aversion;

    ParetoSolution sol;
    sol.k = detail::mean_projection_weight(mu, sigma);
    sol.mbar = detail::system_matrix(mu, sigma, gamma, params.reinsurer_risk_aversion, sol.k);
    try {
        cholesky(sol.mbar);
    } catch (const NotPositiveDefiniteError& e) {
        throw SingularMatrixError(
            std::string("social optimum: system matrix not positive definite; ") + e.what(),
            e.pivot_index);
    }
    sol.ceded = detail::social_ceded(sol.mbar, sigma, params.reinsurer_risk_aversion);
    sol.mutualization = detail::mutualization_for(mu, sigma, gamma, sol.ceded, sol.k);
    sol.interior = check_ceded_interior(params).verdict == Verdict::pass;
    return sol;
}

ConditionEntry check_ceded_interior(const MarketParams& params) {
    const Vector& mu = params.expected_loss;
    const Matrix& sigma = params.covariance;
    const Vector& gamma = params.risk_aversion;
    const double gr = params.reinsurer_risk_aversion;
    const std::size_t n = params.size();
    const double igs = detail::inverse_aversion_sum(gamma);
    const double k = detail::mean_projection_weight(mu, sigma);

    Vector slacks(n);
    for (std::size_t i = 0; i < n; ++i) {
        double left = -gr * sigma(i, i);
        double mid = 0.0;
        double right = k * mu[i] * mu[i] * gamma[i] +
                       (sigma(i, i) - k * mu[i] * mu[i]) / igs;
        for (std::size_t m = 0; m < n; ++m) {
            if (m == i) continue;
            const double coupling = k * mu[i] * mu[m] / igs;
            const double spread = (gr + 1.0 / igs) * sigma(i, m);
            left += positive_part(coupling - spread);
            right -= positive_part(spread - coupling);
            mid += (k * mu[i] * mu[m] - sigma(i, m)) / igs;
        }
        slacks[i] = std::min(mid - left, right - mid);
    }
    return make_entry("pareto_ceded_interior", std::move(slacks), /*strict=*/true);
}

Vector minimal_loading(const MarketParams& params, const Vector& ceded) {
    if (ceded.size() != params.size())
        throw DimensionError("minimal_loading: ceded length mismatch");
    for (double p : ceded)
        if (p < 0.0) throw NegativeCessionError("minimal_loading: ceded share is negative");
    const Vector sp = params.covariance * ceded;
    Vector eta(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        eta[i] = positive_part(0.5 * params.reinsurer_risk_aversion * sp[i] /
                               params.expected_loss[i]);
    }
    return eta;
}

ConditionEntry check_nonneg_loading_margin(const MarketParams& params) {
    const Vector& mu = params.expected_loss;
    const Matrix& sigma = params.covariance;
    const Vector& gamma = params.risk_aversion;
    const double gr = params.reinsurer_risk_aversion;
    const std::size_t n = params.size();
    const double igs = detail::inverse_aversion_sum(gamma);
    const double k = detail::mean_projection_weight(mu, sigma);

    double pos_total = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < n; ++l) pos_total += positive_part(sigma(j, l));

    Vector slacks(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double share = (1.0 / gamma[i]) / igs;
        double pos_row = 0.0;
        for (std::size_t m = 0; m < n; ++m) pos_row += positive_part(sigma(i, m));
        slacks[i] = gamma[i] * (sigma(i, i) - share * share * pos_total -
                                k * mu[i] * mu[i]) -
                    gr * pos_row;
    }
    return make_entry("nonneg_loading_margin", std::move(slacks), /*strict=*/false);
}

Contract loadings_from_welfare(const MarketParams& params, const ParetoSolution& sol,
                               const Vector& targets) {
    if (targets.size() != params.size())
        throw DimensionError("loadings_from_welfare: target length mismatch");
    const Vector surplus = member_surplus(params, sol.mutualization);
    Vector eta(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double exposure = sol.ceded[i] * params.expected_loss[i];
        if (std::abs(sol.ceded[i]) <= 1e-12) {
            throw ZeroCessionError("loadings_from_welfare: member " + std::to_string(i + 1) +
                                   " cedes nothing, loading undefined");
        }
        eta[i] = (surplus[i] - targets[i]) / exposure;
    }
    return Contract{sol.mutualization, sol.ceded, std::move(eta)};
}

Contract equal_surplus_split(const MarketParams& params, const ParetoSolution& sol,
                             const Contract& bowley_contract) {
    const std::size_t n = params.size();
    const double pareto_total = sum(member_disutility(params, sol.mutualization)) +
                                reinsurer_disutility(params, sol.ceded);
    const double bowley_total = sum(member_disutility(params, bowley_contract.mutualization)) +
                                reinsurer_disutility(params, bowley_contract.ceded);
    const double surplus = bowley_total - pareto_total;  // cooperation gain, >= 0

    const WelfareReport base = welfare(params, bowley_contract);
    Vector targets(n);
    for (std::size_t i = 0; i < n; ++i)
        targets[i] = base.member_gains[i] + surplus / static_cast<double>(n + 1);
    return loadings_from_welfare(params, sol, targets);
}

namespace {

constexpr double kScanStep = 1e-4;
constexpr double kRefineWidth = 1e-6;
constexpr double kDominanceSlack = 1e-9;

}  // namespace

std::vector<Interval> single_loading_feasible_set(
    const MarketParams& params, const ParetoSolution& sol, const CoalitionGame& game,
    const std::optional<WelfareReport>& dominance_target) {
    const std::size_t n = params.size();
    const Vector surplus = member_surplus(params, sol.mutualization);
    Vector exposure(n);
    for (std::size_t i = 0; i < n; ++i) exposure[i] = sol.ceded[i] * params.expected_loss[i];
    const double grand = game.worth.back();  // B of the grand coalition

    auto feasible = [&](double t) {
        Allocation alloc;
        alloc.gains.resize(n + 1);
        double member_total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            alloc.gains[i] = surplus[i] - t * exposure[i];
            member_total += alloc.gains[i];
        }
        alloc.gains[n] = grand - member_total;
        if (dominance_target) {
            for (std::size_t i = 0; i < n; ++i)
                if (alloc.gains[i] < dominance_target->member_gains[i] - kDominanceSlack)
                    return false;
            if (alloc.gains[n] < dominance_target->reinsurer_gain - kDominanceSlack)
                return false;
        }
        return check_core(game, alloc).in_core;
    };

    // Member nonnegativity bounds the scan: omega_i(t) >= 0 forces
    // t <= surplus_i / exposure_i for every positively exposed member.
    double t_max = 10.0;
    for (std::size_t i = 0; i < n; ++i)
        if (exposure[i] > 1e-12) t_max = std::min(t_max, surplus[i] / exposure[i]);
    t_max = std::max(t_max, 0.0) + kScanStep;

    const std::size_t steps = static_cast<std::size_t>(std::ceil(t_max / kScanStep)) + 1;
    std::vector<bool> feas(steps);
    for (std::size_t s = 0; s < steps; ++s) feas[s] = feasible(static_cast<double>(s) * kScanStep);

    auto refine = [&](double inside, double outside) {
        while (std::abs(outside - inside) > kRefineWidth) {
            const double mid = 0.5 * (inside + outside);
            (feasible(mid) ? inside : outside) = mid;
        }
        return inside;
    };

    std::vector<Interval> intervals;
    std::size_t s = 0;
    while (s < steps) {
        if (!feas[s]) {
            ++s;
            continue;
        }
        std::size_t e = s;
        while (e + 1 < steps && feas[e + 1]) ++e;
        Interval iv;
        iv.lo = (s == 0) ? 0.0
                         : refine(static_cast<double>(s) * kScanStep,
                                  static_cast<double>(s - 1) * kScanStep);
        iv.hi = (e + 1 == steps) ? static_cast<double>(e) * kScanStep
                                 : refine(static_cast<double>(e) * kScanStep,
                                          static_cast<double>(e + 1) * kScanStep);
        intervals.push_back(iv);
        s = e + 1;
    }
    return intervals;
}

}  // namespace p2p
