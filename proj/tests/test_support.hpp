#pragma once

// Shared fixtures and generators for the test suites.

#include <cmath>
#include <random>

#include "p2p/market.hpp"

namespace testsupport {

/// The worked three-member market used throughout the tests.
inline p2p::MarketParams baseline() {
    p2p::Matrix sigma(3, 3);
    const double entries[3][3] = {
        {10000.0, -1200.0, 720.0}, {-1200.0, 14400.0, 648.0}, {720.0, 648.0, 8100.0}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) sigma(i, j) = entries[i][j];
    return p2p::MarketParams::validated({100.0, 125.0, 85.0}, sigma,
                                        {0.015, 0.025, 0.02}, 0.01);
}

inline p2p::MarketParams baseline_with_aversion(double gamma_r) {
    const p2p::MarketParams base = baseline();
    return p2p::MarketParams::validated(base.expected_loss, base.covariance,
                                        base.risk_aversion, gamma_r);
}

/// Random market with PD covariance built as B'B + eps I.
inline p2p::MarketParams random_market(std::mt19937& rng, std::size_t n,
                                       double gamma_r_max = 0.05) {
    std::uniform_real_distribution<double> mu_dist(50.0, 150.0);
    std::uniform_real_distribution<double> b_dist(-1.0, 1.0);
    std::uniform_real_distribution<double> gamma_dist(0.005, 0.05);
    std::uniform_real_distribution<double> gr_dist(0.0, gamma_r_max);

    p2p::Vector mu(n), gamma(n);
    for (auto& v : mu) v = mu_dist(rng);
    for (auto& v : gamma) v = gamma_dist(rng);

    p2p::Matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b(i, j) = b_dist(rng);
    p2p::Matrix sigma = p2p::transpose(b) * b;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) sigma(i, j) *= 2000.0;
    for (std::size_t i = 0; i < n; ++i) sigma(i, i) += 1000.0;

    return p2p::MarketParams::validated(mu, sigma, gamma, gr_dist(rng));
}

inline double max_abs_diff(const p2p::Matrix& a, const p2p::Matrix& b) {
    return p2p::inf_norm(a - b);
}

inline double max_abs_diff(const p2p::Vector& a, const p2p::Vector& b) {
    return p2p::inf_norm(p2p::sub(a, b));
}

}  // namespace testsupport
