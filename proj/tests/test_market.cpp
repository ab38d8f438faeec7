#include <doctest.h>

#include <random>

#include "p2p/bowley.hpp"
#include "p2p/market.hpp"
#include "p2p/pareto.hpp"
#include "test_support.hpp"

using namespace p2p;

namespace {

Contract status_quo(std::size_t n) {
    return Contract{Matrix::identity(n), Vector(n, 0.0), Vector(n, 0.0)};
}

}  // namespace

TEST_CASE("parameter validation catches bad inputs") {
    const auto base = testsupport::baseline();
    CHECK_THROWS_AS(MarketParams::validated({100.0}, Matrix::identity(1), {0.01}, 0.0), Error);

    Matrix indefinite(2, 2);
    indefinite(0, 0) = 1.0;
    indefinite(0, 1) = 2.0;
    indefinite(1, 0) = 2.0;
    indefinite(1, 1) = 1.0;
    CHECK_THROWS_AS(
        MarketParams::validated({1.0, 1.0}, indefinite, {0.01, 0.01}, 0.0),
        NotPositiveDefiniteError);

    CHECK_THROWS_AS(MarketParams::validated({100.0, -5.0}, Matrix::identity(2),
                                            {0.01, 0.01}, 0.0),
                    Error);
    CHECK_THROWS_AS(MarketParams::validated(base.expected_loss, base.covariance,
                                            {0.015, 0.025, 0.02}, -0.1),
                    Error);
}

TEST_CASE("status quo disutilities at the baseline") {
    const auto params = testsupport::baseline();
    const Evaluation ev = evaluate(params, status_quo(3));
    CHECK(ev.member_disutility[0] == doctest::Approx(175.0));
    CHECK(ev.member_disutility[1] == doctest::Approx(305.0));
    CHECK(ev.member_disutility[2] == doctest::Approx(166.0));
    CHECK(ev.reinsurer_disutility == doctest::Approx(0.0));
}

TEST_CASE("no cession means no premiums and zero reinsurer preference") {
    const auto params = testsupport::baseline();
    Contract c = status_quo(3);
    c.loading = {0.7, 0.1, 2.0};  // any loadings; nothing is ceded
    const Evaluation ev = evaluate(params, c);
    CHECK(inf_norm(ev.premiums) == doctest::Approx(0.0));
    CHECK(ev.reinsurer_preference == doctest::Approx(0.0));
}

TEST_CASE("cooperative contract premiums at the baseline") {
    const auto params = testsupport::baseline();
    const ParetoSolution sol = solve_social_optimum(params);
    const BowleySolution bo1 = leader(params);
    const Contract jpo1 = equal_surplus_split(
        params, sol, Contract{bo1.mutualization, bo1.ceded, bo1.loading});
    const Evaluation ev = evaluate(params, jpo1);
    CHECK(ev.premiums[0] == doctest::Approx(46.9654).epsilon(1e-4));
    CHECK(ev.premiums[1] == doctest::Approx(99.2401).epsilon(1e-5));
    CHECK(ev.premiums[2] == doctest::Approx(43.5725).epsilon(1e-5));
}

TEST_CASE("welfare of the leader-game contract at the baseline") {
    const auto params = testsupport::baseline();
    const BowleySolution bo1 = leader(params);
    const WelfareReport w =
        welfare(params, Contract{bo1.mutualization, bo1.ceded, bo1.loading});
    CHECK(w.member_gains[0] == doctest::Approx(51.9859).epsilon(1e-5));
    CHECK(w.member_gains[1] == doctest::Approx(120.213).epsilon(1e-5));
    CHECK(w.member_gains[2] == doctest::Approx(57.2952).epsilon(1e-5));
    CHECK(w.reinsurer_gain == doctest::Approx(34.7780).epsilon(1e-5));
    for (bool ir : w.member_ir) CHECK(ir);
    CHECK(w.reinsurer_ir);
}

TEST_CASE("status quo has zero welfare gains everywhere") {
    const auto params = testsupport::baseline();
    const WelfareReport w = welfare(params, status_quo(3));
    CHECK(inf_norm(w.member_gains) == doctest::Approx(0.0));
    CHECK(w.reinsurer_gain == doctest::Approx(0.0));
    CHECK(w.total == doctest::Approx(0.0));
    for (bool ir : w.member_ir) CHECK(ir);  // binding IR still passes
    CHECK(w.reinsurer_ir);
}

TEST_CASE("welfare of the single-loading cooperative contract at t = 0.4395") {
    const auto params = testsupport::baseline();
    const ParetoSolution sol = solve_social_optimum(params);
    const Contract jpo2{sol.mutualization, sol.ceded, Vector(3, 0.4395)};
    const WelfareReport w = welfare(params, jpo2);
    CHECK(w.member_gains[0] == doctest::Approx(48.6541).epsilon(1e-5));
    CHECK(w.member_gains[1] == doctest::Approx(135.508).epsilon(1e-5));
    CHECK(w.member_gains[2] == doctest::Approx(57.3793).epsilon(1e-5));
    CHECK(w.reinsurer_gain == doctest::Approx(27.4096).epsilon(1e-4));
}

TEST_CASE("feasibility residuals") {
    const auto params = testsupport::baseline();

    const FeasibilityReport clean = check_feasibility(params, status_quo(3));
    CHECK(clean.zero_conserving_residual == doctest::Approx(0.0));
    CHECK(clean.fairness_residual == doctest::Approx(0.0));
    CHECK(clean.ok);

    const ParetoSolution sol = solve_social_optimum(params);
    const Contract coop{sol.mutualization, sol.ceded, Vector(3, 0.0)};
    CHECK(check_feasibility(params, coop).ok);

    Contract broken = status_quo(3);
    broken.ceded = Vector(3, 0.5);
    const FeasibilityReport rep = check_feasibility(params, broken);
    CHECK(rep.zero_conserving_residual == doctest::Approx(0.5));
    CHECK_FALSE(rep.ok);
}

TEST_CASE("manager-plus-reinsurer total is invariant to the loadings") {
    const auto params = testsupport::baseline();
    const ParetoSolution sol = solve_social_optimum(params);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(0.0, 2.0);
    for (int trial = 0; trial < 25; ++trial) {
        Vector eta1(3), eta2(3);
        for (auto& v : eta1) v = dist(rng);
        for (auto& v : eta2) v = dist(rng);
        const Evaluation a = evaluate(params, Contract{sol.mutualization, sol.ceded, eta1});
        const Evaluation b = evaluate(params, Contract{sol.mutualization, sol.ceded, eta2});
        const double ta = a.manager_total + a.reinsurer_preference;
        const double tb = b.manager_total + b.reinsurer_preference;
        CHECK(std::abs(ta - tb) <= 1e-9 * std::max(1.0, std::abs(ta)));
    }
}

TEST_CASE("welfare totals equal status quo minus realized disutilities") {
    const auto params = testsupport::baseline();
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const ParetoSolution sol = solve_social_optimum(params);
    for (int trial = 0; trial < 10; ++trial) {
        Vector eta(3);
        for (auto& v : eta) v = dist(rng);
        const Contract c{sol.mutualization, sol.ceded, eta};
        const WelfareReport w = welfare(params, c);
        const Evaluation ev = evaluate(params, c);
        const double expected = status_quo_disutility(params) -
                                sum(ev.member_disutility) - ev.reinsurer_disutility;
        CHECK(w.total == doctest::Approx(expected).epsilon(1e-9));
        CHECK(w.total ==
              doctest::Approx(sum(w.member_gains) + w.reinsurer_gain).epsilon(1e-12));
    }
}

TEST_CASE("welfare gains and disutilities cross-reproduce one another") {
    // omega_i = status-quo rho_i - rho_i - premium_i for every baseline contract
    const auto params = testsupport::baseline();
    const ParetoSolution sol = solve_social_optimum(params);
    const BowleySolution bo1 = leader(params);
    const BowleySolution bo2 = leader_single(params);
    const Contract jpo1 = equal_surplus_split(
        params, sol, Contract{bo1.mutualization, bo1.ceded, bo1.loading});

    const Vector quo{175.0, 305.0, 166.0};
    for (const Contract& c :
         {jpo1, Contract{sol.mutualization, sol.ceded, Vector(3, 0.4395)},
          Contract{bo1.mutualization, bo1.ceded, bo1.loading},
          Contract{bo2.mutualization, bo2.ceded, bo2.loading}}) {
        const Evaluation ev = evaluate(params, c);
        const WelfareReport w = welfare(params, c);
        for (std::size_t i = 0; i < 3; ++i) {
            const double via_tables = quo[i] - ev.member_disutility[i] - ev.premiums[i];
            CHECK(w.member_gains[i] == doctest::Approx(via_tables).epsilon(1e-3));
        }
    }
}

TEST_CASE("dimension mismatches are rejected") {
    const auto params = testsupport::baseline();
    Contract c = status_quo(2);
    CHECK_THROWS_AS(evaluate(params, c), DimensionError);
    CHECK_THROWS_AS(welfare(params, c), DimensionError);
    CHECK_THROWS_AS(check_feasibility(params, c), DimensionError);
}
