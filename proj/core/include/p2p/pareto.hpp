#pragma once

#include <optional>
#include <vector>

#include "p2p/conditions.hpp"
#include "p2p/market.hpp"

namespace p2p {

struct CoalitionGame;  // coalition.hpp

/// Solution of the social optimization problem: the cooperative risk
/// allocation that minimizes the sum of all agents' disutilities subject to
/// fairness and zero conservation. The safety loadings are free at this
/// stage; they are chosen later (welfare targets, core allocations, or a
/// single common loading).
struct ParetoSolution {
    Matrix mutualization;  // A*
    Vector ceded;          // p* = 1 - gamma_R Mbar^{-1} Sigma 1
    double k;              // normalizing constant 1 / (mu' Sigma^{-1} mu)
    Matrix mbar;           // SPD system matrix behind the ceded closed form
    bool interior;         // verdict of check_ceded_interior
};

/// Closed-form minimizer of the social problem.
ParetoSolution solve_social_optimum(const MarketParams& params);

/// Strict interior check for the cooperative ceded proportions: when it
/// passes, every ceded share lies in (0,1). Slack is the minimum gap in the
/// three-part inequality chain, per member.
ConditionEntry check_ceded_interior(const MarketParams& params);

/// Componentwise max{0, (gamma_R/2) D(mu)^{-1} Sigma p}: the smallest
/// loadings that keep the reinsurer whole at cession p.
Vector minimal_loading(const MarketParams& params, const Vector& ceded);

/// Sufficient condition for the existence of nonnegative-loading contracts
/// whose welfare allocation can realize any core element.
ConditionEntry check_nonneg_loading_margin(const MarketParams& params);

/// Unique loadings that hit the given per-member welfare-gain targets on top
/// of the cooperative allocation. Requires every ceded share positive.
Contract loadings_from_welfare(const MarketParams& params, const ParetoSolution& sol,
                               const Vector& targets);

/// Cooperative contract that gives every agent the leader-game welfare plus
/// an equal share of the cooperation surplus.
Contract equal_surplus_split(const MarketParams& params, const ParetoSolution& sol,
                             const Contract& bowley_contract);

struct Interval {
    double lo;
    double hi;
};

/// All maximal intervals of common loadings t >= 0 whose induced welfare
/// allocation lies in the core (and, when a target is given, componentwise
/// dominates it). Scanned on a 1e-4 grid with boundaries refined to 1e-6.
/// An empty result means no feasible single loading exists.
std::vector<Interval> single_loading_feasible_set(
    const MarketParams& params, const ParetoSolution& sol, const CoalitionGame& game,
    const std::optional<WelfareReport>& dominance_target);

}  // namespace p2p
