#include <doctest.h>

#include <cmath>
#include <random>

#include "p2p/bowley.hpp"
#include "p2p/oracle.hpp"
#include "p2p/pareto.hpp"
#include "test_support.hpp"

using namespace p2p;

TEST_CASE("follower response at the optimal loadings") {
    const auto params = testsupport::baseline();
    const BowleySolution bo1 = leader(params);
    const FollowerSolution resp = follower(params, bo1.loading);
    CHECK(resp.contract.ceded[0] == doctest::Approx(0.265399).epsilon(1e-5));
    CHECK(resp.contract.ceded[1] == doctest::Approx(0.318127).epsilon(1e-5));
    CHECK(resp.contract.ceded[2] == doctest::Approx(0.269785).epsilon(1e-5));
    CHECK(resp.ceded_interior);
    CHECK(check_feasibility(params, resp.contract).ok);
}

TEST_CASE("free reinsurance is fully taken") {
    const auto params = testsupport::baseline();
    const FollowerSolution resp = follower(params, Vector(3, 0.0));
    for (double p : resp.contract.ceded) CHECK(p == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(resp.ceded_interior);
}

TEST_CASE("follower matches the optimality-system oracle at random loadings") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> dist(0.05, 1.2);
    const auto params = testsupport::baseline();
    for (int trial = 0; trial < 25; ++trial) {
        Vector eta(3);
        for (auto& v : eta) v = dist(rng);
        const FollowerSolution resp = follower(params, eta);
        const auto kkt = oracle::kkt_follower_optimum(params, eta);
        CHECK(testsupport::max_abs_diff(resp.contract.ceded, kkt.ceded) <= 1e-8);
        CHECK(testsupport::max_abs_diff(resp.contract.mutualization, kkt.mutualization) <=
              1e-8);
    }
}

TEST_CASE("out-of-range follower cessions are reported, never clamped") {
    const auto params = testsupport::baseline();
    const FollowerSolution resp = follower(params, Vector(3, 50.0));
    bool out_of_range = false;
    for (double p : resp.contract.ceded)
        if (p < 0.0) out_of_range = true;
    CHECK(out_of_range);  // prohibitive pricing drives the shares negative
    CHECK_FALSE(resp.ceded_interior);
    CHECK(check_feasibility(params, resp.contract).ok);  // still on the manifold
}

TEST_CASE("follower interior condition") {
    const auto params = testsupport::baseline();
    const BowleySolution bo1 = leader(params);

    CHECK(check_follower_interior(params, bo1.loading).verdict == Verdict::pass);

    // at zero loadings the lower strict bound binds exactly, so the check fails
    const ConditionEntry at_zero = check_follower_interior(params, Vector(3, 0.0));
    CHECK(at_zero.verdict == Verdict::fail);
    CHECK(at_zero.margin == doctest::Approx(0.0));

    CHECK(check_follower_interior(params, Vector(3, 100.0)).verdict == Verdict::fail);
}

TEST_CASE("leader optimum at the baseline") {
    const auto params = testsupport::baseline();
    const BowleySolution bo1 = leader(params);
    CHECK(bo1.loading[0] == doctest::Approx(0.345775).epsilon(1e-5));
    CHECK(bo1.loading[1] == doctest::Approx(0.725918).epsilon(1e-5));
    CHECK(bo1.loading[2] == doctest::Approx(0.460025).epsilon(1e-5));
    CHECK(bo1.reinsurer_gain_closed_form == doctest::Approx(34.7780).epsilon(1e-5));
    CHECK_FALSE(bo1.single_loading.has_value());

    // the Bowley label requires the direct IR checks to pass
    CHECK(bo1.conditions.find("member_ir_direct")->verdict == Verdict::pass);
    CHECK(bo1.conditions.find("reinsurer_ir_direct")->verdict == Verdict::pass);
    CHECK(bo1.conditions.find("leader_loading_nonneg_direct")->verdict == Verdict::pass);
}

TEST_CASE("risk-neutral reinsurer leads to a 50 percent cession everywhere") {
    const auto params = testsupport::baseline_with_aversion(0.0);
    const BowleySolution bo1 = leader(params);
    for (double p : bo1.ceded) CHECK(std::abs(p - 0.5) <= 1e-10);
}

TEST_CASE("single-loading leader optimum at the baseline") {
    const auto params = testsupport::baseline();
    const BowleySolution bo2 = leader_single(params);
    REQUIRE(bo2.single_loading.has_value());
    CHECK(*bo2.single_loading == doctest::Approx(0.495050).epsilon(1e-5));
    CHECK(bo2.ceded[0] == doctest::Approx(0.148915).epsilon(1e-5));
    CHECK(bo2.ceded[1] == doctest::Approx(0.445595).epsilon(1e-5));
    CHECK(bo2.ceded[2] == doctest::Approx(0.244199).epsilon(1e-5));

    // the sufficient nonnegativity route fails here, the loading is still positive
    CHECK(bo2.conditions.find("single_loading_nonneg_margin")->verdict == Verdict::fail);
    CHECK(bo2.conditions.find("leader_loading_nonneg_direct")->verdict == Verdict::pass);
}

TEST_CASE("degenerate single-member pools are rejected upstream") {
    CHECK_THROWS_AS(
        MarketParams::validated({100.0}, Matrix::diagonal({100.0}), {0.01}, 0.01), Error);
}

TEST_CASE("member IR margin is advisory at the baseline") {
    // the sufficient condition fails for every member, frozen slacks below,
    // while the realized welfare gains are all positive
    const auto params = testsupport::baseline();
    const ConditionEntry e = check_member_ir_margin(params);
    REQUIRE(e.slacks.size() == 3);
    CHECK(e.slacks[0] == doctest::Approx(-42.8422286213).epsilon(1e-6));
    CHECK(e.slacks[1] == doctest::Approx(-52.2207447945).epsilon(1e-6));
    CHECK(e.slacks[2] == doctest::Approx(-31.8331075663).epsilon(1e-6));
    CHECK(e.verdict == Verdict::fail);

    const BowleySolution bo1 = leader(params);
    const WelfareReport w =
        welfare(params, Contract{bo1.mutualization, bo1.ceded, bo1.loading});
    for (double g : w.member_gains) CHECK(g > 0.0);
}

TEST_CASE("member IR margin, diagonal identical members by hand") {
    const double mu = 50.0, s2 = 6000.0, g = 0.03;
    const auto params =
        MarketParams::validated({mu, mu}, Matrix::diagonal({s2, s2}), {g, g}, 0.0);
    const ConditionEntry e = check_member_ir_margin(params);
    const double k = s2 / (2.0 * mu * mu);
    const double igs = 2.0 / g;
    // share^2 * positive-part total = s2/2; couplings k mu^2 - 0 enter once
    const double expected = 0.5 * g * (s2 - 0.5 * s2 - 3.0 * k * mu * mu) +
                            (k * mu * mu + k * mu * mu - s2) / igs;
    CHECK(e.slacks[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(e.slacks[1] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("member IR margin for identical independent members turns on the pool size") {
    // with n identical diagonal members the slack collapses to
    // gamma sigma^2 (n - 4) / (2n): four members sit exactly on the boundary
    auto make = [](std::size_t n) {
        return MarketParams::validated(Vector(n, 50.0),
                                       Matrix::diagonal(Vector(n, 6000.0)),
                                       Vector(n, 0.03), 0.0);
    };
    const double g = 0.03, s2 = 6000.0;
    for (std::size_t n : {2, 4, 5, 8}) {
        const ConditionEntry e = check_member_ir_margin(make(n));
        const double expected = g * s2 * (static_cast<double>(n) - 4.0) /
                                (2.0 * static_cast<double>(n));
        CHECK(e.slacks[0] == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(check_member_ir_margin(make(2)).verdict == Verdict::fail);
    CHECK(check_member_ir_margin(make(4)).verdict == Verdict::pass);  // binds at zero
    CHECK(check_member_ir_margin(make(8)).verdict == Verdict::pass);
}

TEST_CASE("loading nonnegativity margin by diagonal dominance") {
    // risk-neutral case passes trivially: the right-hand side vanishes
    const auto neutral = testsupport::baseline_with_aversion(0.0);
    CHECK(check_loading_nonneg_margin(neutral).verdict == Verdict::pass);

    // the baseline fails the inequality yet the loadings are nonnegative
    const auto params = testsupport::baseline();
    const ConditionEntry e = check_loading_nonneg_margin(params);
    CHECK(e.verdict == Verdict::fail);
    CHECK(e.margin == doctest::Approx(-6.301814272840204).epsilon(1e-6));
    const BowleySolution bo1 = leader(params);
    for (double v : bo1.loading) CHECK(v >= 0.0);

    // a covariance with a dominant off-diagonal row makes the route inconclusive
    Matrix skew(2, 2);
    skew(0, 0) = 100.0;
    skew(0, 1) = 120.0;
    skew(1, 0) = 120.0;
    skew(1, 1) = 200.0;
    const auto lopsided =
        MarketParams::validated({40.0, 45.0}, skew, {0.02, 0.02}, 0.001);
    CHECK(check_loading_nonneg_margin(lopsided).verdict == Verdict::inconclusive);
}

TEST_CASE("loading bound report, risk-neutral case is exact") {
    const auto params = testsupport::baseline_with_aversion(0.0);
    const auto entries = loading_bound_report(params);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].name == "leader_loading_exact_risk_neutral");
    CHECK(entries[0].verdict == Verdict::pass);
    CHECK(entries[1].name == "follower_interior_equiv_risk_neutral");
    CHECK(entries[1].verdict == Verdict::pass);

    // the equivalence slack by direct computation for member 1
    const double igs = 1.0 / 0.015 + 1.0 / 0.025 + 1.0 / 0.02;
    const double k = 0.3399830291953787;
    const Matrix& s = params.covariance;
    const Vector& m = params.expected_loss;
    double spread = std::abs(s(0, 1) - k * m[0] * m[1]) + std::abs(s(0, 2) - k * m[0] * m[2]);
    const double expected =
        k * m[0] * m[0] * 0.015 + (s(0, 0) - k * m[0] * m[0]) / igs - spread / igs;
    CHECK(entries[1].slacks[0] == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("loading bound report at the baseline") {
    const auto params = testsupport::baseline();
    const auto entries = loading_bound_report(params);
    REQUIRE(entries.size() == 3);

    const ConditionEntry& dominance = entries[0];
    const ConditionEntry& spectral = entries[1];
    CHECK(dominance.name == "leader_loading_bound_dominance");
    CHECK(spectral.name == "leader_loading_bound_spectral");

    // both bounds dominate the exact second-order term entrywise
    CHECK(dominance.verdict == Verdict::pass);
    CHECK(spectral.verdict == Verdict::pass);
    CHECK(dominance.notes.find("tighter route") != std::string::npos);  // 74.2 < 84.7
}

TEST_CASE("loading bound magnitudes bracket the exact second-order term") {
    const auto params = testsupport::baseline();
    // exact: gamma_R^2 Sigma (gamma_R Sigma + 2M)^{-1} Sigma 1, frozen via an
    // independent route
    const Vector exact{45.8703847901, 49.7324656483, 43.0301615326};
    const auto entries = loading_bound_report(params);
    const double bound_dom = 74.21801369600448;
    const double bound_spec = 84.72453740588337;
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(entries[0].slacks[i] == doctest::Approx(bound_dom - exact[i]).epsilon(1e-6));
        CHECK(entries[1].slacks[i] == doctest::Approx(bound_spec - exact[i]).epsilon(1e-6));
    }
}

TEST_CASE("design comparison at the baseline") {
    const auto params = testsupport::baseline();
    const ParetoSolution pareto = solve_social_optimum(params);

    const DesignComparison c1 = compare(params, pareto, leader(params));
    CHECK(c1.total_welfare_gap == doctest::Approx(268.951 - 264.272).epsilon(1e-3));
    CHECK_FALSE(c1.bowley_is_socially_optimal);

    const DesignComparison c2 = compare(params, pareto, leader_single(params));
    CHECK(c2.total_welfare_gap == doctest::Approx(268.951 - 263.888).epsilon(1e-3));
    CHECK_FALSE(c2.bowley_is_socially_optimal);
}

TEST_CASE("design comparison under a risk-neutral reinsurer") {
    const auto params = testsupport::baseline_with_aversion(0.0);
    const DesignComparison c = compare(params, solve_social_optimum(params), leader(params));
    for (double gap : c.ceded_gap) CHECK(gap == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("follower system matrix is positive definite on random markets") {
    std::mt19937 rng(555);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto params =
            testsupport::random_market(rng, 2 + static_cast<std::size_t>(trial % 4), 1.0);
        const BowleySolution bo1 = leader(params);  // cholesky of M inside
        CHECK(bo1.m.rows() == params.size());
    }
}

TEST_CASE("equilibrium identities on random markets") {
    std::mt19937 rng(909);
    for (int trial = 0; trial < 40; ++trial) {
        const auto params =
            testsupport::random_market(rng, 2 + static_cast<std::size_t>(trial % 3));
        const BowleySolution bo1 = leader(params);
        const std::size_t n = params.size();

        // p at the optimum equals the one-solve closed form
        const Matrix damped = params.reinsurer_risk_aversion * params.covariance + 2.0 * bo1.m;
        const Vector direct = solve(damped, bo1.m * ones(n));
        CHECK(testsupport::max_abs_diff(bo1.ceded, direct) <= 1e-9);

        // closed-form reinsurer gain equals the negated preference and is positive
        const Evaluation ev =
            evaluate(params, Contract{bo1.mutualization, bo1.ceded, bo1.loading});
        CHECK(bo1.reinsurer_gain_closed_form ==
              doctest::Approx(-ev.reinsurer_preference).epsilon(1e-8));
        CHECK(bo1.reinsurer_gain_closed_form > 0.0);

        // strict welfare ordering whenever the reinsurer is risk averse
        if (params.reinsurer_risk_aversion > 1e-6) {
            const DesignComparison cmp =
                compare(params, solve_social_optimum(params), bo1);
            CHECK(cmp.total_welfare_gap > 1e-9);
        }
    }
}

TEST_CASE("leader stationarity via finite differences") {
    const auto params = testsupport::baseline();
    const BowleySolution bo1 = leader(params);

    auto objective = [&](const Vector& eta) {
        const FollowerSolution resp = follower(params, eta);
        return evaluate(params, resp.contract).reinsurer_preference;
    };
    const Vector g = oracle::fd_gradient(objective, bo1.loading);
    const double scale = 1.0 + std::abs(bo1.reinsurer_gain_closed_form);
    CHECK(inf_norm(g) <= 1e-5 * scale);

    // single-loading stationarity for the scalar objective
    const BowleySolution bo2 = leader_single(params);
    auto single_objective = [&](const Vector& t) {
        const FollowerSolution resp = follower(params, Vector(3, t[0]));
        return evaluate(params, resp.contract).reinsurer_preference;
    };
    const Vector gs = oracle::fd_gradient(single_objective, Vector{*bo2.single_loading});
    CHECK(std::abs(gs[0]) <= 1e-5 * scale);
}
