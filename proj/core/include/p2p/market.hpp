#pragma once

#include <vector>

#include "p2p/matrix.hpp"

namespace p2p {

/// A pool of n >= 2 members with mean-variance preferences, plus one
/// reinsurer. Expected losses are strictly positive, the loss covariance is
/// symmetric positive definite, member risk aversions are strictly positive
/// and the reinsurer's is nonnegative.
struct MarketParams {
    Vector expected_loss;            // mu, one entry per member, currency units
    Matrix covariance;               // Sigma, currency^2
    Vector risk_aversion;            // gamma, 1/currency
    double reinsurer_risk_aversion;  // gamma_R, 1/currency

    std::size_t size() const { return expected_loss.size(); }

    /// Validating constructor; throws DimensionError / NotPositiveDefiniteError /
    /// Error on any violated invariant.
    static MarketParams validated(Vector expected_loss, Matrix covariance,
                                  Vector risk_aversion, double reinsurer_risk_aversion);
};

/// A contract: the mutualization matrix (entry (i,j) is the share of member
/// j's loss borne by member i), the ceded proportions, and the safety
/// loadings entering the expected-value premium (1 + loading_i) ceded_i mu_i.
struct Contract {
    Matrix mutualization;  // A
    Vector ceded;          // p
    Vector loading;        // eta
};

struct Evaluation {
    Vector member_disutility;     // rho_i = A_i mu + (gamma_i/2) A_i Sigma A_i'
    double reinsurer_disutility;  // rho_R = mu'p + (gamma_R/2) p'Sigma p
    Vector premiums;              // (1 + eta_i) p_i mu_i
    Vector member_preference;     // u_i = rho_i + premium_i
    double manager_total;         // sum of u_i
    double reinsurer_preference;  // v = (gamma_R/2) p'Sigma p - (D(mu) eta)'p
};

struct WelfareReport {
    Vector member_gains;      // omega_i
    double reinsurer_gain;    // omega_R = -v
    double total;             // sum of all gains
    std::vector<bool> member_ir;
    bool reinsurer_ir;
};

struct FeasibilityReport {
    double zero_conserving_residual;  // ||1'A + p' - 1'||_inf
    double fairness_residual;         // ||A mu + D(mu) p - mu||_inf
    bool ok;
};

/// Raw evaluation of a contract; the contract need not be feasible.
Evaluation evaluate(const MarketParams& params, const Contract& contract);

/// Welfare gains relative to the status quo (identity mutualization, no
/// cession). IR flags allow a -1e-10 slack so exactly binding IR passes.
WelfareReport welfare(const MarketParams& params, const Contract& contract);

/// Residuals of the zero-conserving and fairness constraints;
/// ok when both are within 1e-8 of scale.
FeasibilityReport check_feasibility(const MarketParams& params, const Contract& contract);

// Disutility pieces used by the engines and the coalition game.
Vector member_disutility(const MarketParams& params, const Matrix& mutualization);
double reinsurer_disutility(const MarketParams& params, const Vector& ceded);

/// Per-member variance-reduction surplus (gamma_i/2)(sigma_i^2 - A_i Sigma A_i').
Vector member_surplus(const MarketParams& params, const Matrix& mutualization);

/// Total status-quo disutility sum_i (mu_i + gamma_i sigma_i^2 / 2).
double status_quo_disutility(const MarketParams& params);

}  // namespace p2p
