#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "riskdp/vigu.hpp"

using namespace riskdp;

namespace {

TabularRSMDP two_step_chain() {
  // Deterministic: state 0 -> 1 -> 1, point-mass rewards 0.25 then 0.75.
  TabularRSMDP mdp(2, 1, 2);
  for (int h = 1; h <= 2; ++h)
    for (int s = 0; s < 2; ++s) mdp.row(h, s, 0)[1] = 1.0;
  for (int s = 0; s < 2; ++s) {
    mdp.reward(1, s, 0) = RewardDist::point_mass(0.25);
    mdp.reward(2, s, 0) = RewardDist::point_mass(0.75);
  }
  return mdp;
}

TabularRSMDP gen(GeneratorKind kind, int H, int length = 2, std::uint64_t seed = 0) {
  GeneratorSpec g;
  g.kind = kind;
  g.horizon = H;
  g.length = length;
  g.states = 2;
  g.actions = 2;
  g.seed = seed;
  return gen_mdp(g);
}

}  // namespace

TEST_CASE("collect_samples examples") {
  const auto mdp = two_step_chain();
  Simulator sim(mdp);
  const Grid g(4, 2);
  const auto model = collect_samples(sim, g, 50, CounterRng(1));
  CHECK(sim.calls() == 2 * 2 * 1 * 50);
  CHECK(model.kernel.states_row(1, 0, 0)[1] == 1.0);
  CHECK(model.kernel.reward_row(1, 0, 0)[1] == 1.0);
  CHECK(model.kernel.reward_row(2, 1, 0)[3] == 1.0);

  TabularRSMDP uni(1, 1, 1);
  uni.row(1, 0, 0)[0] = 1.0;
  Simulator su(uni);
  const Grid g1(4, 1);
  const auto m1 = collect_samples(su, g1, 10000, CounterRng(2));
  const double sigma = std::sqrt(0.125 * 0.875 / 10000);
  CHECK(std::abs(m1.kernel.reward_row(1, 0, 0)[0] - 0.125) <= 4 * sigma);

  const auto one = collect_samples(su, g1, 1, CounterRng(3));
  CHECK(std::count(one.kernel.reward_row(1, 0, 0).begin(), one.kernel.reward_row(1, 0, 0).end(), 1.0) == 1);
  CHECK_THROWS_AS(collect_samples(su, g1, 0, CounterRng(3)), std::invalid_argument);
}

TEST_CASE("property: empirical rows are multiples of 1/n summing to one") {
  const auto mdp = gen(GeneratorKind::kRandom, 3, 2, 5);
  Simulator sim(mdp);
  const Grid g(8, 3);
  const std::int64_t n = 37;
  const auto model = collect_samples(sim, g, n, CounterRng(4));
  for (int h = 1; h <= 3; ++h)
    for (int s = 0; s < mdp.S; ++s)
      for (int a = 0; a < mdp.A; ++a) {
        double ts = 0.0, tr = 0.0;
        for (double p : model.kernel.states_row(h, s, a)) {
          REQUIRE(std::abs(p * n - std::round(p * n)) < 1e-9);
          ts += p;
        }
        for (double p : model.kernel.reward_row(h, s, a)) {
          REQUIRE(std::abs(p * n - std::round(p * n)) < 1e-9);
          tr += p;
        }
        REQUIRE(std::abs(ts - 1.0) <= 1e-12);
        REQUIRE(std::abs(tr - 1.0) <= 1e-12);
      }
}

TEST_CASE("property: empirical reward bins are unbiased") {
  const auto mdp = gen(GeneratorKind::kChain, 1, 2);
  const Grid g(4, 1);
  const auto exact = discretize(mdp, g);
  const int reps = 200;
  const std::int64_t n = 500;
  std::vector<double> mean(g.reward_size(), 0.0);
  for (int r = 0; r < reps; ++r) {
    Simulator sim(mdp);
    const auto model = collect_samples(sim, g, n, CounterRng(1000 + r));
    for (int i = 0; i < g.reward_size(); ++i) mean[i] += model.kernel.reward_row(1, 0, 1)[i] / reps;
  }
  for (int i = 0; i < g.reward_size(); ++i) {
    const double p = exact.kernel.reward_row(1, 0, 1)[i];
    const double sigma = std::sqrt(std::max(p * (1 - p), 1e-12) / n);
    CHECK(std::abs(mean[i] - p) <= 4 * sigma / std::sqrt(double(reps)) + 1e-12);
  }
}

TEST_CASE("plan examples") {
  const auto mdp = gen(GeneratorKind::kRandom, 3, 2, 6);
  const Grid g(8, 3);
  const auto env = discretize(mdp, g);
  const auto u = make_utility(UtilitySpec::exponential(2.0), 3);
  const EmpiricalModel exact{env.kernel, 0};
  const auto planned = plan(exact, u, g);
  const auto opt = solve_optimal(env, u);
  CHECK(planned.policy == opt.policy);
  for (int h = 1; h <= 3; ++h)
    for (int s = 0; s < mdp.S; ++s)
      for (int y = 0; y < g.y_size(h); ++y) REQUIRE(planned.value.at(h, s, y) == opt.value.at(h, s, y));

  // One-hot model: deterministic rollup U(0.25 + 0.75) from (1, 0, 0).
  const auto chain = two_step_chain();
  Simulator sim(chain);
  const Grid g2(4, 2);
  const auto ue = make_utility(UtilitySpec::exponential(1.0), 2);
  const auto p2 = plan(collect_samples(sim, g2, 3, CounterRng(5)), ue, g2);
  CHECK(p2.value.at(1, 0, 0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(p2.value.at(2, 1, 2) == doctest::Approx(ue(1.25)).epsilon(1e-15));
}

TEST_CASE("plan converges to the discretized optimum for large n") {
  const auto mdp = gen(GeneratorKind::kChain, 3, 2);
  const Grid g(8, 3);
  const auto u = make_utility(UtilitySpec::exponential(1.0), 3);
  const auto opt = solve_optimal(discretize(mdp, g), u);
  Simulator sim(mdp);
  const auto est = plan(collect_samples(sim, g, 100000, CounterRng(6)), u, g);
  double worst = 0.0;
  for (int h = 1; h <= 3; ++h)
    for (int s = 0; s < mdp.S; ++s)
      for (int y = 0; y < g.y_size(h); ++y)
        worst = std::max(worst, std::abs(est.value.at(h, s, y) - opt.value.at(h, s, y)));
  CHECK(worst <= 0.02 * 3 * u.kappa());
}

TEST_CASE("vigu examples") {
  TabularRSMDP one(2, 1, 2);
  for (int h = 1; h <= 2; ++h)
    for (int s = 0; s < 2; ++s) {
      one.row(h, s, 0)[0] = 0.4;
      one.row(h, s, 0)[1] = 0.6;
    }
  const Grid g(4, 2);
  const auto u = make_utility(UtilitySpec::linear(1.0), 2);
  Simulator sim(one);
  const auto res = vigu(sim, u, g, 20, CounterRng(1));
  const auto env = discretize(one, g);
  CHECK(evaluate_policy(env, u, res.estimate.policy).at(1, 0, 0) == solve_optimal(env, u).value.at(1, 0, 0));
  CHECK(res.simulator_calls == 2 * 2 * 20);
  CHECK(res.iota1 == doctest::Approx(std::log(4.0 * 4 * 2 * 1 / (0.1 * 0.25))));

  const auto b = gen(GeneratorKind::kSafeRiskyBandit, 1);
  Simulator sb(b);
  const Grid gb(64, 1);
  const auto ub = make_utility(UtilitySpec::exponential(4.0), 1);
  const auto rb = vigu(sb, ub, gb, 5000, CounterRng(2));
  CHECK(rb.policy(1, 0, 0.0) == 0);

  const auto mdp = gen(GeneratorKind::kRandom, 3, 2, 9);
  Simulator s1(mdp), s2(mdp);
  const Grid g3(8, 3);
  const auto ue = make_utility(UtilitySpec::exponential(-1.0), 3);
  const auto a = vigu(s1, ue, g3, 100, CounterRng(7));
  const auto c = vigu(s2, ue, g3, 100, CounterRng(7));
  CHECK(a.estimate.policy == c.estimate.policy);
}

TEST_CASE("property: output policy never beats the discretized optimum") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto mdp = gen(GeneratorKind::kRandom, 3, 2, 50 + seed);
    const Grid g(8, 3);
    const auto env = discretize(mdp, g);
    const auto u = make_utility(UtilitySpec::exponential(2.0), 3);
    Simulator sim(mdp);
    const auto res = vigu(sim, u, g, 50, CounterRng(seed));
    const auto v = evaluate_policy(env, u, res.estimate.policy);
    const auto opt = solve_optimal(env, u);
    for (int h = 1; h <= 4; ++h)
      for (int s = 0; s < mdp.S; ++s)
        for (int y = 0; y < g.y_size(h); ++y) REQUIRE(v.at(h, s, y) <= opt.value.at(h, s, y) + 1e-12);
  }
}

TEST_CASE("sample streams are keyed by cell") {
  // The same cell sees the same samples whatever the horizon of the surrounding MDP.
  const auto small = gen(GeneratorKind::kChain, 2, 2);
  const auto large = gen(GeneratorKind::kChain, 4, 2);
  Simulator a(small), b(large);
  const auto ma = collect_samples(a, Grid(8, 2), 40, CounterRng(3));
  const auto mb = collect_samples(b, Grid(8, 4), 40, CounterRng(3));
  for (int s = 0; s < 2; ++s)
    for (int act = 0; act < 2; ++act)
      for (int i = 0; i <= 8; ++i) CHECK(ma.kernel.reward_row(1, s, act)[i] == mb.kernel.reward_row(1, s, act)[i]);
}
