#include "riskdp/vigu.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace riskdp {

EmpiricalModel collect_samples(Simulator& sim, const Grid& grid, std::int64_t n, const CounterRng& rng) {
  if (n < 1) throw std::invalid_argument("collect_samples needs n >= 1");
  const auto& mdp = sim.mdp();
  if (grid.horizon() != mdp.H) throw std::invalid_argument("grid horizon does not match the MDP horizon");
  EmpiricalModel model{FactoredKernel(mdp.S, mdp.A, mdp.H, grid.reward_size()), n};
  std::vector<std::int64_t> state_counts(static_cast<std::size_t>(mdp.S));
  std::vector<std::int64_t> reward_counts(static_cast<std::size_t>(grid.reward_size()));
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int h = 1; h <= mdp.H; ++h) {
    for (int s = 0; s < mdp.S; ++s) {
      for (int a = 0; a < mdp.A; ++a) {
        CounterRng cell_rng = rng.split(static_cast<std::uint64_t>(h), static_cast<std::uint64_t>(s),
                                        static_cast<std::uint64_t>(a));
        std::fill(state_counts.begin(), state_counts.end(), 0);
        std::fill(reward_counts.begin(), reward_counts.end(), 0);
        for (std::int64_t i = 0; i < n; ++i) {
          const auto sample = sim.query(s, a, h, cell_rng);
          ++state_counts[sample.next_state];
          ++reward_counts[project_r(grid, sample.reward)];
        }
        auto p_state = model.kernel.states_row(h, s, a);
        for (int sp = 0; sp < mdp.S; ++sp) p_state[sp] = static_cast<double>(state_counts[sp]) * inv_n;
        auto p_reward = model.kernel.reward_row(h, s, a);
        for (int i = 0; i < grid.reward_size(); ++i) p_reward[i] = static_cast<double>(reward_counts[i]) * inv_n;
      }
    }
  }
  return model;
}

OptimalSolution plan(const EmpiricalModel& model, const UtilityFn& u, const Grid& grid) {
  return backward_induction(model.kernel, grid, u);
}

double vigu_iota1(int horizon, int states, int actions, double p, double eps) {
  const double h = horizon;
  return std::log(4.0 * h * h * states * actions / (p * eps));
}

ViguResult vigu(Simulator& sim, const UtilityFn& u, const Grid& grid, std::int64_t n, const CounterRng& rng,
                double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("failure probability p must lie in (0, 1)");
  const std::int64_t calls_before = sim.calls();
  const auto model = collect_samples(sim, grid, n, rng);
  ViguResult result;
  result.estimate = plan(model, u, grid);
  result.policy = lift_policy(result.estimate.policy, grid);
  result.simulator_calls = sim.calls() - calls_before;
  result.samples_per_cell = n;
  const auto& mdp = sim.mdp();
  result.iota1 = vigu_iota1(mdp.H, mdp.S, mdp.A, p, grid.eps());
  return result;
}

}  // namespace riskdp
