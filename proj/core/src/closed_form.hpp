#pragma once

// Closed-form pieces of the social risk-sharing optimum, shared by the
// Pareto engine, the Bowley engine and the coalition game. These work on raw
// (mu, sigma, gamma) slices so that sub-pools of any size >= 1 can be solved
// without going through MarketParams validation (which requires n >= 2).

#include "p2p/matrix.hpp"

namespace p2p::detail {

/// sum_j gamma_j^{-1}
double inverse_aversion_sum(const Vector& gamma);

/// k = 1 / (mu' Sigma^{-1} mu)
double mean_projection_weight(const Vector& mu, const Matrix& sigma);

/// Mbar = (gamma_r + 1/sum gamma^-1) Sigma + k D(mu^2) D(gamma)
///        - k mu mu' / sum gamma^-1.
/// With gamma_r = 0 this is the follower system matrix M.
Matrix system_matrix(const Vector& mu, const Matrix& sigma, const Vector& gamma,
                     double gamma_r, double k);

/// Optimal mutualization of the retained shares D(1 - p):
/// A = J D(1-p) + k (I - J) D(1-p) mu mu' Sigma^{-1},  J = D(gamma)^{-1} 1 1' / sum gamma^-1.
Matrix mutualization_for(const Vector& mu, const Matrix& sigma, const Vector& gamma,
                         const Vector& ceded, double k);

/// p* = 1 - gamma_r Mbar^{-1} Sigma 1 of the social optimum on the slice.
Vector social_ceded(const Matrix& mbar, const Matrix& sigma, double gamma_r);

}  // namespace p2p::detail
