#include "riskdp/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "riskdp/csv.hpp"
#include "riskdp/error.hpp"

namespace riskdp {

namespace {

constexpr double kZ99 = 2.5758293035489004;

void check_utility_horizon(const UtilityFn& u, int horizon) {
  if (u.horizon_cap() < horizon) {
    std::ostringstream msg;
    msg << "utility domain [0, " << u.horizon_cap() << "] does not cover the horizon " << horizon;
    throw std::invalid_argument(msg.str());
  }
}

void check_policy_shape(const DiscretePolicy& policy, const Grid& grid, int states, int actions) {
  if (!(policy.grid() == grid) || policy.states() != states) {
    throw std::invalid_argument("policy shape does not match the environment");
  }
  for (int h = 1; h <= grid.horizon(); ++h) {
    for (int s = 0; s < states; ++s) {
      for (int y = 0; y < grid.y_size(h); ++y) {
        const int a = policy.at(h, s, y);
        if (a < 0 || a >= actions) {
          std::ostringstream msg;
          msg << "policy action " << a << " at (h=" << h << ",s=" << s << ",y=" << y << ") is not a valid action";
          throw std::invalid_argument(msg.str());
        }
      }
    }
  }
}

}  // namespace

void bellman_backup(std::span<const double> p_state, std::span<const double> p_reward, const ValueTable& next,
                    int h, std::span<double> out) {
  const Grid& grid = next.grid();
  const int next_size = grid.y_size(h + 1);
  std::vector<double> mixed(static_cast<std::size_t>(next_size), 0.0);
  for (std::size_t sp = 0; sp < p_state.size(); ++sp) {
    const double p = p_state[sp];
    if (p == 0.0) continue;
    const auto row = next.row(h + 1, static_cast<int>(sp));
    for (int y = 0; y < next_size; ++y) mixed[y] += p * row[y];
  }
  const int size = grid.y_size(h);
  for (int y = 0; y < size; ++y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p_reward.size(); ++i) {
      const double w = p_reward[i];
      if (w != 0.0) acc += w * mixed[y + i];
    }
    out[y] = acc;
  }
}

void fill_terminal(ValueTable& values, const UtilityFn& u) {
  const Grid& grid = values.grid();
  const int h = grid.horizon() + 1;
  for (int s = 0; s < values.states(); ++s) {
    for (int y = 0; y < grid.y_size(h); ++y) values.at(h, s, y) = u(grid.value(y));
  }
}

OptimalSolution backward_induction(const FactoredKernel& kernel, const Grid& grid, const UtilityFn& u) {
  if (grid.horizon() != kernel.H || grid.reward_size() != kernel.reward_size) {
    throw std::invalid_argument("kernel shape does not match the grid");
  }
  check_utility_horizon(u, kernel.H);
  OptimalSolution sol{ValueTable(grid, kernel.S), QTable(grid, kernel.S, kernel.A), DiscretePolicy(grid, kernel.S)};
  fill_terminal(sol.value, u);
  std::vector<double> q_column;
  for (int h = kernel.H; h >= 1; --h) {
    const int size = grid.y_size(h);
    q_column.resize(static_cast<std::size_t>(size));
    for (int s = 0; s < kernel.S; ++s) {
      for (int a = 0; a < kernel.A; ++a) {
        bellman_backup(kernel.states_row(h, s, a), kernel.reward_row(h, s, a), sol.value, h, q_column);
        for (int y = 0; y < size; ++y) sol.q.at(h, s, y, a) = q_column[y];
      }
      for (int y = 0; y < size; ++y) {
        const int best = sol.q.argmax(h, s, y);
        sol.policy.at(h, s, y) = best;
        sol.value.at(h, s, y) = sol.q.at(h, s, y, best);
      }
    }
  }
  return sol;
}

OptimalSolution solve_optimal(const DiscretizedEnv& env, const UtilityFn& u) {
  return backward_induction(env.kernel, env.grid, u);
}

QTable evaluate_policy_q(const DiscretizedEnv& env, const UtilityFn& u, const DiscretePolicy& policy) {
  const auto& k = env.kernel;
  check_utility_horizon(u, k.H);
  check_policy_shape(policy, env.grid, k.S, k.A);
  ValueTable values(env.grid, k.S);
  QTable q(env.grid, k.S, k.A);
  fill_terminal(values, u);
  std::vector<double> q_column;
  for (int h = k.H; h >= 1; --h) {
    const int size = env.grid.y_size(h);
    q_column.resize(static_cast<std::size_t>(size));
    for (int s = 0; s < k.S; ++s) {
      for (int a = 0; a < k.A; ++a) {
        bellman_backup(k.states_row(h, s, a), k.reward_row(h, s, a), values, h, q_column);
        for (int y = 0; y < size; ++y) q.at(h, s, y, a) = q_column[y];
      }
      for (int y = 0; y < size; ++y) values.at(h, s, y) = q.at(h, s, y, policy.at(h, s, y));
    }
  }
  return q;
}

ValueTable evaluate_policy(const DiscretizedEnv& env, const UtilityFn& u, const DiscretePolicy& policy) {
  const auto& k = env.kernel;
  check_utility_horizon(u, k.H);
  check_policy_shape(policy, env.grid, k.S, k.A);
  ValueTable values(env.grid, k.S);
  fill_terminal(values, u);
  std::vector<double> q_column;
  for (int h = k.H; h >= 1; --h) {
    const int size = env.grid.y_size(h);
    q_column.resize(static_cast<std::size_t>(size));
    for (int s = 0; s < k.S; ++s) {
      for (int a = 0; a < k.A; ++a) {
        bellman_backup(k.states_row(h, s, a), k.reward_row(h, s, a), values, h, q_column);
        for (int y = 0; y < size; ++y) {
          if (policy.at(h, s, y) == a) values.at(h, s, y) = q_column[y];
        }
      }
    }
  }
  return values;
}

HistoryPolicyValue brute_force_history_optimum(const DiscretizedEnv& env, const UtilityFn& u,
                                               std::size_t max_histories) {
  const auto& k = env.kernel;
  const Grid& grid = env.grid;
  check_utility_horizon(u, k.H);
  HistoryPolicyValue result;

  // Each call is one distinct history ending in state s at timestamp h; the
  // reward sum is carried as a real number rather than a grid index.
  std::function<double(int, int, double)> best_from = [&](int h, int s, double reward_sum) -> double {
    if (++result.history_count > max_histories) {
      std::ostringstream msg;
      msg << "history enumeration exceeded the guard of " << max_histories << " histories";
      throw SizeError(msg.str());
    }
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < k.A; ++a) {
      ++result.enumeration_count;
      const auto p_state = k.states_row(h, s, a);
      const auto p_reward = k.reward_row(h, s, a);
      double value = 0.0;
      for (int sp = 0; sp < k.S; ++sp) {
        if (p_state[sp] == 0.0) continue;
        for (int i = 0; i < k.reward_size; ++i) {
          if (p_reward[i] == 0.0) continue;
          const double total = reward_sum + grid.value(i);
          const double tail = h == k.H ? u(total) : best_from(h + 1, sp, total);
          value += p_state[sp] * p_reward[i] * tail;
        }
      }
      best = std::max(best, value);
    }
    return best;
  };

  result.optimum.resize(static_cast<std::size_t>(k.S));
  for (int s = 0; s < k.S; ++s) result.optimum[s] = best_from(1, s, 0.0);
  return result;
}

McEstimate mc_policy_value(const TabularRSMDP& mdp, const UtilityFn& u, const LiftedPolicy& policy, int s1,
                           std::int64_t trials, CounterRng& rng) {
  if (trials < 1) throw std::invalid_argument("mc_policy_value needs trials >= 1");
  if (s1 < 0 || s1 >= mdp.S) throw std::out_of_range("start state out of range");
  check_utility_horizon(u, mdp.H);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t t = 0; t < trials; ++t) {
    int s = s1;
    double y = 0.0;
    for (int h = 1; h <= mdp.H; ++h) {
      const int a = policy(h, s, y);
      const auto step = sample_step(mdp, s, a, h, rng);
      y += step.reward;
      s = step.next_state;
    }
    const double x = u(y);
    const double delta = x - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (x - mean);
  }
  McEstimate est;
  est.mean = mean;
  est.trials = trials;
  est.ci_half_width = trials > 1
                          ? kZ99 * std::sqrt(m2 / static_cast<double>(trials - 1)) / std::sqrt(static_cast<double>(trials))
                          : std::numeric_limits<double>::infinity();
  return est;
}

void write_value_csv(const ValueTable& values, const DiscretePolicy* policy, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  std::vector<std::string> header{"h", "s", "y_index", "y_value", "value"};
  if (policy) header.push_back("action");
  write_csv_record(os, header);
  const Grid& grid = values.grid();
  for (int h = 1; h <= grid.horizon() + 1; ++h) {
    for (int s = 0; s < values.states(); ++s) {
      for (int y = 0; y < grid.y_size(h); ++y) {
        std::vector<CsvCell> row{std::int64_t{h}, std::int64_t{s}, std::int64_t{y}, grid.value(y), values.at(h, s, y)};
        if (policy) {
          row.emplace_back(h <= grid.horizon() ? CsvCell{std::int64_t{policy->at(h, s, y)}} : CsvCell{});
        }
        write_csv_record(os, row);
      }
    }
  }
  if (!os) throw std::runtime_error("error while writing " + path);
}

}  // namespace riskdp
