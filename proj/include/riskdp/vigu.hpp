#pragma once

#include <cstdint>

#include "riskdp/dp.hpp"
#include "riskdp/grid.hpp"
#include "riskdp/mdp.hpp"
#include "riskdp/rng.hpp"
#include "riskdp/utility.hpp"

namespace riskdp {

/// Generative model over an MDP: answers (s, a, h) queries with one sample
/// and counts the queries it served.
class Simulator {
 public:
  explicit Simulator(const TabularRSMDP& mdp) : mdp_(&mdp) {}

  StepSample query(int s, int a, int h, CounterRng& rng) {
    ++calls_;
    return sample_step(*mdp_, s, a, h, rng);
  }

  const TabularRSMDP& mdp() const { return *mdp_; }
  std::int64_t calls() const { return calls_; }

 private:
  const TabularRSMDP* mdp_;
  std::int64_t calls_ = 0;
};

/// Empirical transition and projected-reward frequencies from n samples per
/// (h, s, a). Every stored entry is a count divided by n.
struct EmpiricalModel {
  FactoredKernel kernel;
  std::int64_t n = 0;
};

/// Queries the simulator n times for every (h, s, a). The samples of cell
/// (h, s, a) come from rng.split(h, s, a), so the model does not depend on
/// the order in which cells are visited.
EmpiricalModel collect_samples(Simulator& sim, const Grid& grid, std::int64_t n, const CounterRng& rng);

/// Unclipped backward induction under the empirical model.
OptimalSolution plan(const EmpiricalModel& model, const UtilityFn& u, const Grid& grid);

/// log(4 H^2 S A / (p eps)).
double vigu_iota1(int horizon, int states, int actions, double p, double eps);

struct ViguResult {
  LiftedPolicy policy;        // interpolated output policy
  OptimalSolution estimate;   // V-hat, Q-hat and the grid policy pi-hat
  std::int64_t simulator_calls = 0;
  std::int64_t samples_per_cell = 0;
  double iota1 = 0.0;
};

/// collect_samples, then plan, then lift the greedy policy to continuous y.
ViguResult vigu(Simulator& sim, const UtilityFn& u, const Grid& grid, std::int64_t n, const CounterRng& rng,
                double p = 0.1);

}  // namespace riskdp
