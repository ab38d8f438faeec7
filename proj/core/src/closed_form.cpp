#include "closed_form.hpp"

namespace p2p::detail {

double inverse_aversion_sum(const Vector& gamma) {
    double s = 0.0;
    for (double g : gamma) s += 1.0 / g;
    return s;
}

double mean_projection_weight(const Vector& mu, const Matrix& sigma) {
    return 1.0 / dot(mu, solve(sigma, mu));
}

Matrix system_matrix(const Vector& mu, const Matrix& sigma, const Vector& gamma,
                     double gamma_r, double k) {
    const std::size_t n = mu.size();
    const double igs = inverse_aversion_sum(gamma);
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double v = (gamma_r + 1.0 / igs) * sigma(i, j) - k * mu[i] * mu[j] / igs;
            if (i == j) v += k * mu[i] * mu[i] * gamma[i];
            m(i, j) = v;
        }
    }
    return m;
}

Matrix mutualization_for(const Vector& mu, const Matrix& sigma, const Vector& gamma,
                         const Vector& ceded, double k) {
    const std::size_t n = mu.size();
    const double igs = inverse_aversion_sum(gamma);
    const Vector w = solve(sigma, mu);  // Sigma^{-1} mu
    Vector retained(n);
    for (std::size_t i = 0; i < n; ++i) retained[i] = 1.0 - ceded[i];

    // rank-one mean-projection part B = D(1-p) mu w'; each row of J replaces
    // a row of its operand by the plain column sums scaled by 1/(gamma_i igs)
    double retained_mean_total = 0.0;
    for (std::size_t l = 0; l < n; ++l) retained_mean_total += retained[l] * mu[l];

    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double share = (1.0 / gamma[i]) / igs;
        for (std::size_t j = 0; j < n; ++j) {
            const double b_ij = retained[i] * mu[i] * w[j];
            const double jb_ij = share * retained_mean_total * w[j];
            a(i, j) = share * retained[j] + k * (b_ij - jb_ij);
        }
    }
    return a;
}

Vector social_ceded(const Matrix& mbar, const Matrix& sigma, double gamma_r) {
    const std::size_t n = mbar.rows();
    const Vector s1 = sigma * ones(n);
    const Vector x = solve(mbar, s1);
    Vector p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = 1.0 - gamma_r * x[i];
    return p;
}

}  // namespace p2p::detail
