#include <benchmark/benchmark.h>

#include <random>

#include "p2p/bowley.hpp"
#include "p2p/coalition.hpp"
#include "p2p/oracle.hpp"
#include "p2p/pareto.hpp"

namespace {

p2p::MarketParams make_market(std::size_t n) {
    std::mt19937 rng(117 + n);
    std::uniform_real_distribution<double> mu_dist(50.0, 150.0);
    std::uniform_real_distribution<double> b_dist(-1.0, 1.0);
    std::uniform_real_distribution<double> gamma_dist(0.005, 0.05);

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
    return p2p::MarketParams::validated(mu, sigma, gamma, 0.01);
}

void BM_SocialOptimum(benchmark::State& state) {
    const auto params = make_market(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(p2p::solve_social_optimum(params));
}
BENCHMARK(BM_SocialOptimum)->Arg(3)->Arg(6)->Arg(12);

void BM_Leader(benchmark::State& state) {
    const auto params = make_market(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(p2p::leader(params));
}
BENCHMARK(BM_Leader)->Arg(3)->Arg(6)->Arg(12);

void BM_BuildGame(benchmark::State& state) {
    const auto params = make_market(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(p2p::build_game(params));
}
BENCHMARK(BM_BuildGame)->Arg(3)->Arg(6)->Arg(8);

void BM_FindCoreElement(benchmark::State& state) {
    const auto params = make_market(static_cast<std::size_t>(state.range(0)));
    const auto game = p2p::build_game(params);
    for (auto _ : state) benchmark::DoNotOptimize(p2p::find_core_element(game));
}
BENCHMARK(BM_FindCoreElement)->Arg(3)->Arg(6)->Arg(8);

void BM_KktSocialOracle(benchmark::State& state) {
    const auto params = make_market(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(p2p::oracle::kkt_social_optimum(params));
}
BENCHMARK(BM_KktSocialOracle)->Arg(3)->Arg(6)->Arg(12);

}  // namespace

BENCHMARK_MAIN();
