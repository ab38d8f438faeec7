#pragma once

#include <functional>
#include <optional>

#include "p2p/market.hpp"

namespace p2p {

/// Independent brute-force verification of the closed forms: the social and
/// follower problems are equality-constrained convex quadratics, so their
/// optimality systems are exactly linear and can be solved directly. Nothing
/// here shares code with the engines' closed-form paths.
namespace oracle {

/// Assembled optimality system of a quadratic program
///   min 1/2 x'Hx + c'x  s.t.  Cx = rhs,
/// over x = (rows of the mutualization matrix, then the ceded shares).
/// One zero-conserving row is dropped: the mu-weighted fairness rows sum to
/// the same identity, so keeping all rows would make the system singular.
struct KktSystem {
    std::size_t dim;  // number of primal unknowns
    Matrix h;
    Matrix c;
    Vector rhs;
    Vector linear;  // c' of the objective
};

struct RiskAllocation {
    Matrix mutualization;
    Vector ceded;
};

KktSystem assemble_social_system(const Vector& mu, const Matrix& sigma, const Vector& gamma,
                                 double gamma_r, const std::optional<Vector>& loading);

/// Direct linear solve of the social problem (quadratic reinsurer term).
RiskAllocation kkt_social_optimum(const MarketParams& params);

/// Direct linear solve of the follower problem at quoted loadings
/// (premium-linear reinsurer term).
RiskAllocation kkt_follower_optimum(const MarketParams& params, const Vector& loading);

/// Slice variants for coalition sub-pools (no n >= 2 validation).
RiskAllocation kkt_social_optimum_slice(const Vector& mu, const Matrix& sigma,
                                        const Vector& gamma, double gamma_r);
RiskAllocation kkt_follower_optimum_slice(const Vector& mu, const Matrix& sigma,
                                          const Vector& gamma, const Vector& loading);

/// Members-only restricted problem: no cession, mutualization only.
Matrix kkt_pool_only_optimum(const Vector& mu, const Matrix& sigma, const Vector& gamma);

/// Central finite differences with per-coordinate step rel_step * (1 + |x_i|).
Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                   double rel_step = 1e-5);

struct GridSearch {
    Vector best_loading;
    double best_value;
};

/// Exhaustive leader-objective scan; the follower response at each grid point
/// comes from the KKT solve, not the closed form. Guarded to n <= 3.
GridSearch grid_leader(const MarketParams& params, const Vector& lo, const Vector& hi,
                       std::size_t steps_per_dim);

struct GridSearch1D {
    double best_loading;
    double best_value;
};

/// Same scan restricted to one common loading.
GridSearch1D grid_leader_single(const MarketParams& params, double lo, double hi,
                                std::size_t steps);

}  // namespace oracle
}  // namespace p2p
