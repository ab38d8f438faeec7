#include "p2p/market.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "p2p/errors.hpp"

namespace p2p {

namespace {

constexpr double kFeasibilityTol = 1e-8;
constexpr double kIrSlack = 1e-10;

void check_dims(const MarketParams& params, const Contract& c) {
    const std::size_t n = params.size();
    if (c.mutualization.rows() != n || c.mutualization.cols() != n ||
        c.ceded.size() != n || c.loading.size() != n) {
        throw DimensionError("contract dimensions do not match the market");
    }
}

// quadratic form A_i Sigma A_i' for every row i
Vector row_quadratics(const Matrix& a, const Matrix& sigma) {
    const std::size_t n = a.rows();
    Vector q(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < n; ++l) s += sigma(j, l) * a(i, l);
            q[i] += a(i, j) * s;
        }
    }
    return q;
}

}  // namespace

MarketParams MarketParams::validated(Vector expected_loss, Matrix covariance,
                                     Vector risk_aversion, double reinsurer_risk_aversion) {
    const std::size_t n = expected_loss.size();
    if (n < 2) throw Error("market needs at least two members");
    if (covariance.rows() != n || covariance.cols() != n)
        throw DimensionError("covariance must be n x n");
    if (risk_aversion.size() != n)
        throw DimensionError("risk aversion vector length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(expected_loss[i] > 0.0))
            throw Error("expected loss of member " + std::to_string(i + 1) + " must be positive");
        if (!(covariance(i, i) > 0.0))
            throw Error("loss variance of member " + std::to_string(i + 1) + " must be positive");
        if (!(risk_aversion[i] > 0.0))
            throw Error("risk aversion of member " + std::to_string(i + 1) + " must be positive");
    }
    if (!(reinsurer_risk_aversion >= 0.0))
        throw Error("reinsurer risk aversion must be nonnegative");
    if (!is_symmetric(covariance))
        throw NotSymmetricError("covariance must be symmetric");
    cholesky(covariance);  // throws NotPositiveDefiniteError when not PD
    return MarketParams{std::move(expected_loss), std::move(covariance),
                        std::move(risk_aversion), reinsurer_risk_aversion};
}

Vector member_disutility(const MarketParams& params, const Matrix& a) {
    Vector rho = a * params.expected_loss;
    const Vector q = row_quadratics(a, params.covariance);
    for (std::size_t i = 0; i < params.size(); ++i)
        rho[i] += 0.5 * params.risk_aversion[i] * q[i];
    return rho;
}

double reinsurer_disutility(const MarketParams& params, const Vector& p) {
    return dot(params.expected_loss, p) +
           0.5 * params.reinsurer_risk_aversion * dot(p, params.covariance * p);
}

Vector member_surplus(const MarketParams& params, const Matrix& a) {
    const Vector q = row_quadratics(a, params.covariance);
    Vector s(params.size());
    for (std::size_t i = 0; i < params.size(); ++i)
        s[i] = 0.5 * params.risk_aversion[i] * (params.covariance(i, i) - q[i]);
    return s;
}

double status_quo_disutility(const MarketParams& params) {
    double s = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i)
        s += params.expected_loss[i] + 0.5 * params.risk_aversion[i] * params.covariance(i, i);
    return s;
}

Evaluation evaluate(const MarketParams& params, const Contract& c) {
    check_dims(params, c);
    const std::size_t n = params.size();
    Evaluation ev;
    ev.member_disutility = member_disutility(params, c.mutualization);
    ev.reinsurer_disutility = reinsurer_disutility(params, c.ceded);
    ev.premiums.resize(n);
    ev.member_preference.resize(n);
    double premium_income = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ev.premiums[i] = (1.0 + c.loading[i]) * c.ceded[i] * params.expected_loss[i];
        ev.member_preference[i] = ev.member_disutility[i] + ev.premiums[i];
        premium_income += ev.premiums[i];
    }
    ev.manager_total = sum(ev.member_preference);
    ev.reinsurer_preference = ev.reinsurer_disutility - premium_income;
    return ev;
}

WelfareReport welfare(const MarketParams& params, const Contract& c) {
    check_dims(params, c);
    const std::size_t n = params.size();
    WelfareReport w;
    // Fairness-reduced form: omega_i = (gamma_i/2)(sigma_i^2 - A_i Sigma A_i') - eta_i p_i mu_i
    w.member_gains = member_surplus(params, c.mutualization);
    double premium_margin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w.member_gains[i] -= c.loading[i] * c.ceded[i] * params.expected_loss[i];
        premium_margin += c.loading[i] * c.ceded[i] * params.expected_loss[i];
    }
    w.reinsurer_gain = premium_margin -
                       0.5 * params.reinsurer_risk_aversion * dot(c.ceded, params.covariance * c.ceded);
    w.total = sum(w.member_gains) + w.reinsurer_gain;
    w.member_ir.resize(n);
    for (std::size_t i = 0; i < n; ++i) w.member_ir[i] = w.member_gains[i] >= -kIrSlack;
    w.reinsurer_ir = w.reinsurer_gain >= -kIrSlack;
    return w;
}

FeasibilityReport check_feasibility(const MarketParams& params, const Contract& c) {
    check_dims(params, c);
    const std::size_t n = params.size();
    double zc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double col = c.ceded[j];
        for (std::size_t i = 0; i < n; ++i) col += c.mutualization(i, j);
        zc = std::max(zc, std::abs(col - 1.0));
    }
    const Vector am = c.mutualization * params.expected_loss;
    double fair = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        fair = std::max(fair, std::abs(am[i] + c.ceded[i] * params.expected_loss[i] -
                                       params.expected_loss[i]));
    }
    const double mu_scale = inf_norm(params.expected_loss);
    const bool ok = zc <= kFeasibilityTol && fair <= kFeasibilityTol * mu_scale;
    return {zc, fair, ok};
}

}  // namespace p2p
