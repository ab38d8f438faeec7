#pragma once

#include <optional>
#include <vector>

#include "p2p/conditions.hpp"
#include "p2p/market.hpp"
#include "p2p/pareto.hpp"

namespace p2p {

/// The plan manager's best response to quoted loadings: the cost-minimizing
/// risk allocation given the premium schedule.
struct FollowerSolution {
    Contract contract;
    bool ceded_interior;  // every ceded share strictly inside (0,1); out-of-range
                          // values are returned as-is, never clamped
};

FollowerSolution follower(const MarketParams& params, const Vector& loading);

/// Strict condition on the loadings under which the follower's ceded shares
/// stay inside (0,1). Slack is the smaller gap of the two-sided bound on
/// mu_i eta_i, per member.
ConditionEntry check_follower_interior(const MarketParams& params, const Vector& loading);

/// Leader-follower equilibrium: the reinsurer prices first, the plan manager
/// responds with the follower allocation.
struct BowleySolution {
    Matrix m;                       // SPD follower system matrix
    Vector loading;                 // optimal loadings (a common value replicated
                                    // when single_loading is set)
    Matrix mutualization;
    Vector ceded;
    std::optional<double> single_loading;
    double reinsurer_gain_closed_form;  // also checked against -v at the optimum
    ConditionReport conditions;
};

/// Closed-form leader optimum with member-specific loadings.
BowleySolution leader(const MarketParams& params);

/// Closed-form leader optimum restricted to one common loading.
BowleySolution leader_single(const MarketParams& params);

/// Sufficient condition for all member IRs to hold at the leader optimum.
ConditionEntry check_member_ir_margin(const MarketParams& params);

/// Diagonal-dominance route to nonnegativity of the leader loadings;
/// inconclusive when the dominance premises fail.
ConditionEntry check_loading_nonneg_margin(const MarketParams& params);

/// Bound diagnostics for the leader loadings: the exact entrywise loadings in
/// the risk-neutral case, and two perturbation bounds (diagonal-dominance and
/// spectral) on the second-order term otherwise, together with the resulting
/// verified/unverified status of the follower-interior condition at the
/// optimum.
std::vector<ConditionEntry> loading_bound_report(const MarketParams& params);

struct DesignComparison {
    Vector ceded_gap;          // cooperative minus leader-game ceded shares
    double total_welfare_gap;  // cooperative minus leader-game total welfare, > 0
    bool bowley_is_socially_optimal;  // always false for a valid market
};

DesignComparison compare(const MarketParams& params, const ParetoSolution& pareto,
                         const BowleySolution& bowley);

}  // namespace p2p
