#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "p2p/conditions.hpp"
#include "p2p/market.hpp"
#include "p2p/pareto.hpp"

namespace p2p {

/// Transferable-utility game over the n members and the reinsurer.
/// Coalitions are bitmasks: bit i (i < members) is member i+1, bit `members`
/// is the reinsurer. worth[mask] is the maximal welfare gain the coalition
/// can secure on its own.
struct CoalitionGame {
    std::size_t members = 0;
    std::vector<double> worth;  // size 1 << (members + 1)

    std::uint32_t reinsurer_bit() const { return 1u << members; }
    std::uint32_t grand_mask() const { return (1u << (members + 1)) - 1u; }
    double value(std::uint32_t mask) const { return worth[mask]; }
};

/// Worth of one coalition: members in `member_mask`, optionally joined by
/// the reinsurer. Solved by the closed form of the restricted social problem
/// (ceded shares forced to zero when the reinsurer is absent).
double coalition_value(const MarketParams& params, std::uint32_t member_mask,
                       bool with_reinsurer);

/// Enumerate all 2^(n+1) coalitions (n <= 16).
CoalitionGame build_game(const MarketParams& params);

/// A candidate division of the grand-coalition worth: member gains first,
/// the reinsurer's gain last.
struct Allocation {
    Vector gains;  // length members + 1
};

struct CoreViolation {
    std::uint32_t coalition;
    double slack;  // negative when violated
};

struct CoreCheck {
    bool in_core;
    std::vector<CoreViolation> violated;  // sorted by slack, most violated first
    double efficiency_gap;                // sum(gains) - worth(grand)
};

CoreCheck check_core(const CoalitionGame& game, const Allocation& alloc);

/// A feasible point of the core polytope found by a phase-1 simplex over all
/// coalition inequalities. Throws InfeasibleError (with the phase-1 residual
/// as certificate) if the polytope is numerically empty.
Allocation find_core_element(const CoalitionGame& game);

/// Per-member slack of: welfare at minimal loadings >= marginal contribution
/// to the grand coalition. When it holds, every core element is realizable
/// with loadings above the minimal ones.
ConditionEntry check_marginal_contribution_bound(const MarketParams& params,
                                                 const ParetoSolution& sol,
                                                 const CoalitionGame& game);

struct StabilityCheck {
    bool stable;
    std::optional<std::uint32_t> blocking;  // most violated coalition, if any
};

/// A contract is coalitionally stable when its risk allocation matches the
/// social optimum and its induced welfare allocation lies in the core.
StabilityCheck check_stability(const MarketParams& params, const CoalitionGame& game,
                               const Contract& contract);

/// JSON export: {"n": ..., "values": {"<mask>": worth, ...}} with masks in
/// ascending order.
std::string to_json(const CoalitionGame& game);

}  // namespace p2p
