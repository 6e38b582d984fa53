#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskdp/grid.hpp"
#include "riskdp/mdp.hpp"
#include "riskdp/rng.hpp"
#include "riskdp/utility.hpp"

namespace riskdp {

struct OptimalSolution {
  ValueTable value;
  QTable q;
  DiscretePolicy policy;
};

/// One Bellman backup for a single (h, s, a):
///   out[y] = sum_{s'} p_state[s'] sum_i p_reward[i] next(h+1, s', y + i)
/// for every y index of timestamp h. All planners use this routine, so equal
/// inputs give bit-identical Q values.
void bellman_backup(std::span<const double> p_state, std::span<const double> p_reward, const ValueTable& next,
                    int h, std::span<double> out);

/// Sets V(H+1, s, y) = U(y) on every terminal grid point.
void fill_terminal(ValueTable& values, const UtilityFn& u);

/// Backward induction on an arbitrary factored kernel over `grid`.
OptimalSolution backward_induction(const FactoredKernel& kernel, const Grid& grid, const UtilityFn& u);

/// Optimal values, Q values and greedy policy of the discretized environment.
OptimalSolution solve_optimal(const DiscretizedEnv& env, const UtilityFn& u);

/// Value of a fixed grid policy in the discretized environment.
ValueTable evaluate_policy(const DiscretizedEnv& env, const UtilityFn& u, const DiscretePolicy& policy);

/// Q values of a fixed grid policy (Q(h,s,y,a) backs up V^pi_{h+1}).
QTable evaluate_policy_q(const DiscretizedEnv& env, const UtilityFn& u, const DiscretePolicy& policy);

struct HistoryPolicyValue {
  std::vector<double> optimum;          // sup over history-dependent policies, per start state
  std::size_t history_count = 0;        // distinct reachable decision histories
  std::size_t enumeration_count = 0;    // histories x actions evaluated
};

/// Exhaustive optimum over deterministic history-dependent policies of the
/// discretized environment. Recurses over full histories
/// (s_1, a_1, r_1, ..., s_h) and scores terminals with U of the summed
/// rewards, never merging histories that share (s, y). Throws SizeError once
/// more than `max_histories` decision histories have been visited.
HistoryPolicyValue brute_force_history_optimum(const DiscretizedEnv& env, const UtilityFn& u,
                                               std::size_t max_histories = 100000);

struct McEstimate {
  double mean = 0.0;
  double ci_half_width = 0.0;  // 99% normal-approximation half width
  std::int64_t trials = 0;
};

/// Monte Carlo value E[U(sum r_h)] of a lifted policy in the original
/// environment. The rollout carries the true continuous cumulative reward;
/// the policy projects it onto the grid at decision time.
McEstimate mc_policy_value(const TabularRSMDP& mdp, const UtilityFn& u, const LiftedPolicy& policy, int s1,
                           std::int64_t trials, CounterRng& rng);

/// Writes (h, s, y_index, y_value, value[, action]) rows.
void write_value_csv(const ValueTable& values, const DiscretePolicy* policy, const std::string& path);

}  // namespace riskdp
