#include "p2p/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "p2p/errors.hpp"

namespace p2p::oracle {

namespace {

RiskAllocation solve_system(const KktSystem& sys) {
    const std::size_t nv = sys.dim;
    const std::size_t nc = sys.c.rows();
    const std::size_t total = nv + nc;

    Matrix kkt(total, total);
    for (std::size_t i = 0; i < nv; ++i)
        for (std::size_t j = 0; j < nv; ++j) kkt(i, j) = sys.h(i, j);
    for (std::size_t r = 0; r < nc; ++r)
        for (std::size_t j = 0; j < nv; ++j) {
            kkt(nv + r, j) = sys.c(r, j);
            kkt(j, nv + r) = sys.c(r, j);
        }
    Vector rhs(total, 0.0);
    for (std::size_t i = 0; i < nv; ++i) rhs[i] = -sys.linear[i];
    for (std::size_t r = 0; r < nc; ++r) rhs[nv + r] = sys.rhs[r];

    Vector sol;
    try {
        sol = solve(kkt, rhs);
    } catch (const SingularMatrixError& e) {
        throw SingularMatrixError(std::string("kkt solve: ") + e.what(), e.pivot_index);
    }

    // residual of the assembled linear system
    const Vector back = kkt * sol;
    double scale = 1.0 + inf_norm(rhs);
    for (std::size_t i = 0; i < total; ++i) {
        if (std::abs(back[i] - rhs[i]) > 1e-8 * scale)
            throw SingularMatrixError("kkt solve: residual too large", i);
    }

    const std::size_t n = static_cast<std::size_t>(std::round(
        (std::sqrt(4.0 * static_cast<double>(nv) + 1.0) - 1.0) / 2.0));  // nv = n^2 + n
    RiskAllocation out{Matrix(n, n), Vector(n)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.mutualization(i, j) = sol[i * n + j];
    for (std::size_t i = 0; i < n; ++i) out.ceded[i] = sol[n * n + i];
    return out;
}

}  // namespace

KktSystem assemble_social_system(const Vector& mu, const Matrix& sigma, const Vector& gamma,
                                 double gamma_r, const std::optional<Vector>& loading) {
    const std::size_t n = mu.size();
    const std::size_t nv = n * n + n;
    const std::size_t nc = 2 * n - 1;

    KktSystem sys{nv, Matrix(nv, nv), Matrix(nc, nv), Vector(nc, 0.0), Vector(nv, 0.0)};

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            sys.linear[i * n + j] = mu[j];  // 1'A mu
            for (std::size_t l = 0; l < n; ++l)
                sys.h(i * n + j, i * n + l) = gamma[i] * sigma(j, l);
        }
    }
    if (loading) {
        // follower objective: premiums are linear in the ceded shares
        for (std::size_t i = 0; i < n; ++i)
            sys.linear[n * n + i] = (1.0 + (*loading)[i]) * mu[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            sys.linear[n * n + i] = mu[i];
            for (std::size_t j = 0; j < n; ++j)
                sys.h(n * n + i, n * n + j) = gamma_r * sigma(i, j);
        }
    }

    for (std::size_t i = 0; i < n; ++i) {  // fairness rows
        for (std::size_t j = 0; j < n; ++j) sys.c(i, i * n + j) = mu[j];
        sys.c(i, n * n + i) = mu[i];
        sys.rhs[i] = mu[i];
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {  // zero-conserving rows, last dropped
        for (std::size_t i = 0; i < n; ++i) sys.c(n + j, i * n + j) = 1.0;
        sys.c(n + j, n * n + j) = 1.0;
        sys.rhs[n + j] = 1.0;
    }
    return sys;
}

RiskAllocation kkt_social_optimum(const MarketParams& params) {
    return kkt_social_optimum_slice(params.expected_loss, params.covariance,
                                    params.risk_aversion, params.reinsurer_risk_aversion);
}

RiskAllocation kkt_follower_optimum(const MarketParams& params, const Vector& loading) {
    if (loading.size() != params.size())
        throw DimensionError("kkt_follower_optimum: loading length mismatch");
    return kkt_follower_optimum_slice(params.expected_loss, params.covariance,
                                      params.risk_aversion, loading);
}

RiskAllocation kkt_social_optimum_slice(const Vector& mu, const Matrix& sigma,
                                        const Vector& gamma, double gamma_r) {
    return solve_system(assemble_social_system(mu, sigma, gamma, gamma_r, std::nullopt));
}

RiskAllocation kkt_follower_optimum_slice(const Vector& mu, const Matrix& sigma,
                                          const Vector& gamma, const Vector& loading) {
    return solve_system(assemble_social_system(mu, sigma, gamma, 0.0, loading));
}

Matrix kkt_pool_only_optimum(const Vector& mu, const Matrix& sigma, const Vector& gamma) {
    const std::size_t n = mu.size();
    const std::size_t nv = n * n;
    const std::size_t nc = 2 * n - 1;
    const std::size_t total = nv + nc;

    Matrix kkt(total, total);
    Vector rhs(total, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            rhs[i * n + j] = -mu[j];
            for (std::size_t l = 0; l < n; ++l)
                kkt(i * n + j, i * n + l) = gamma[i] * sigma(j, l);
        }
    }
    auto set_constraint = [&](std::size_t row, std::size_t col, double v) {
        kkt(nv + row, col) = v;
        kkt(col, nv + row) = v;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) set_constraint(i, i * n + j, mu[j]);
        rhs[nv + i] = mu[i];
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) set_constraint(n + j, i * n + j, 1.0);
        rhs[nv + n + j] = 1.0;
    }

    const Vector sol = solve(kkt, rhs);
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = sol[i * n + j];
    return a;
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                   double rel_step) {
    Vector g(x.size());
    Vector probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = rel_step * (1.0 + std::abs(x[i]));
        probe[i] = x[i] + h;
        const double up = f(probe);
        probe[i] = x[i] - h;
        const double down = f(probe);
        probe[i] = x[i];
        if (!std::isfinite(up) || !std::isfinite(down))
            throw NonFiniteError("fd_gradient: objective not finite near evaluation point");
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

namespace {

double leader_objective(const MarketParams& params, const Vector& eta) {
    const RiskAllocation resp = kkt_follower_optimum(params, eta);
    const Vector& p = resp.ceded;
    double premium_margin = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i)
        premium_margin += params.expected_loss[i] * eta[i] * p[i];
    return 0.5 * params.reinsurer_risk_aversion * dot(p, params.covariance * p) -
           premium_margin;
}

}  // namespace

GridSearch grid_leader(const MarketParams& params, const Vector& lo, const Vector& hi,
                       std::size_t steps_per_dim) {
    const std::size_t n = params.size();
    if (n > 3) throw GridError("grid_leader: full grid limited to three members");
    if (lo.size() != n || hi.size() != n)
        throw DimensionError("grid_leader: bound length mismatch");
    for (std::size_t i = 0; i < n; ++i)
        if (!(lo[i] < hi[i])) throw GridError("grid_leader: need lo < hi in every coordinate");
    if (steps_per_dim < 2) throw GridError("grid_leader: need at least two steps per dimension");

    GridSearch best{Vector(n, 0.0), std::numeric_limits<double>::infinity()};
    Vector eta(n);
    std::vector<std::size_t> idx(n, 0);
    while (true) {
        for (std::size_t i = 0; i < n; ++i) {
            eta[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(idx[i]) /
                                 static_cast<double>(steps_per_dim - 1);
        }
        const double v = leader_objective(params, eta);
        if (v < best.best_value) best = {eta, v};

        std::size_t d = 0;
        while (d < n && ++idx[d] == steps_per_dim) idx[d++] = 0;
        if (d == n) break;
    }
    return best;
}

GridSearch1D grid_leader_single(const MarketParams& params, double lo, double hi,
                                std::size_t steps) {
    if (!(lo < hi)) throw GridError("grid_leader_single: need lo < hi");
    if (steps < 2) throw GridError("grid_leader_single: need at least two steps");
    GridSearch1D best{lo, std::numeric_limits<double>::infinity()};
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(steps - 1);
        const double v = leader_objective(params, Vector(params.size(), t));
        if (v < best.best_value) best = {t, v};
    }
    return best;
}

}  // namespace p2p::oracle
