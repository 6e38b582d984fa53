#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "riskdp/mdp.hpp"

namespace riskdp {

/// Uniform covering with spacing eps = 1/m of the one-step reward range
/// [0, 1] (indices 0..m) and of each cumulative-reward range [0, h-1]
/// (indices 0..(h-1)m, h in [1, H+1]). Index i stands for the value i/m, so
/// adding a reward index to a y index is exact integer arithmetic.
class Grid {
 public:
  Grid(int m, int horizon);

  int m() const { return m_; }
  int horizon() const { return horizon_; }
  double eps() const { return 1.0 / m_; }

  int reward_size() const { return m_ + 1; }
  int y_size(int h) const { return (h - 1) * m_ + 1; }
  double value(int index) const { return static_cast<double>(index) / m_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int m_;
  int horizon_;
};

/// Nearest reward grid index; exact ties go to the smaller point.
/// Accepts r in [-1e-9, 1 + 1e-9], otherwise throws std::out_of_range.
int project_r(const Grid& grid, double r);

/// Nearest index of the cumulative-reward grid at timestamp h (h in [1, H+1]);
/// exact ties go to the smaller point. Accepts y in [-1e-9, h - 1 + 1e-9].
int project_y(const Grid& grid, int h, double y);

/// Per-timestamp tables over (s, y-index) for h in [1, H+1].
class ValueTable {
 public:
  ValueTable() = default;
  ValueTable(const Grid& grid, int states);

  double& at(int h, int s, int y) { return data_[h - 1][static_cast<std::size_t>(s) * grid_.y_size(h) + y]; }
  double at(int h, int s, int y) const { return data_[h - 1][static_cast<std::size_t>(s) * grid_.y_size(h) + y]; }
  std::span<double> row(int h, int s) {
    return {data_[h - 1].data() + static_cast<std::size_t>(s) * grid_.y_size(h), static_cast<std::size_t>(grid_.y_size(h))};
  }
  std::span<const double> row(int h, int s) const {
    return {data_[h - 1].data() + static_cast<std::size_t>(s) * grid_.y_size(h), static_cast<std::size_t>(grid_.y_size(h))};
  }

  const Grid& grid() const { return grid_; }
  int states() const { return states_; }

 private:
  Grid grid_{1, 1};
  int states_ = 0;
  std::vector<std::vector<double>> data_;
};

/// Per-timestamp tables over (s, y-index, a) for h in [1, H].
class QTable {
 public:
  QTable() = default;
  QTable(const Grid& grid, int states, int actions, double fill = 0.0);

  double& at(int h, int s, int y, int a) { return data_[h - 1][index(h, s, y, a)]; }
  double at(int h, int s, int y, int a) const { return data_[h - 1][index(h, s, y, a)]; }

  /// Greedy action at (h, s, y); lowest index wins ties.
  int argmax(int h, int s, int y) const;
  double max(int h, int s, int y) const;

  const Grid& grid() const { return grid_; }
  int states() const { return states_; }
  int actions() const { return actions_; }

 private:
  std::size_t index(int h, int s, int y, int a) const {
    return (static_cast<std::size_t>(s) * grid_.y_size(h) + y) * actions_ + a;
  }

  Grid grid_{1, 1};
  int states_ = 0;
  int actions_ = 0;
  std::vector<std::vector<double>> data_;
};

/// Grid policy: an action for each (h, s, y-index), h in [1, H].
class DiscretePolicy {
 public:
  DiscretePolicy() = default;
  DiscretePolicy(const Grid& grid, int states, int fill_action = 0);

  int& at(int h, int s, int y) { return data_[h - 1][static_cast<std::size_t>(s) * grid_.y_size(h) + y]; }
  int at(int h, int s, int y) const { return data_[h - 1][static_cast<std::size_t>(s) * grid_.y_size(h) + y]; }

  const Grid& grid() const { return grid_; }
  int states() const { return states_; }

  /// Greedy policy of a Q table (lowest-index tie-break).
  static DiscretePolicy greedy(const QTable& q);

  friend bool operator==(const DiscretePolicy&, const DiscretePolicy&) = default;

 private:
  Grid grid_{1, 1};
  int states_ = 0;
  std::vector<std::vector<int>> data_;
};

/// Factored kernel P(s', y' | s, y, a) = P_S(s' | s, a) * R(y' - y | s, a),
/// with R a probability vector over the reward grid. Shared by the exact
/// discretized environment and the empirical models of the learners.
struct FactoredKernel {
  int S = 0;
  int A = 0;
  int H = 0;
  int reward_size = 0;
  std::vector<double> state_probs;   // [(h-1)][s][a][s']
  std::vector<double> reward_probs;  // [(h-1)][s][a][i]

  FactoredKernel() = default;
  FactoredKernel(int states, int actions, int horizon, int reward_bins);

  std::size_t cell(int h, int s, int a) const {
    return (static_cast<std::size_t>(h - 1) * S + s) * A + a;
  }
  std::span<double> states_row(int h, int s, int a) {
    return {state_probs.data() + cell(h, s, a) * S, static_cast<std::size_t>(S)};
  }
  std::span<const double> states_row(int h, int s, int a) const {
    return {state_probs.data() + cell(h, s, a) * S, static_cast<std::size_t>(S)};
  }
  std::span<double> reward_row(int h, int s, int a) {
    return {reward_probs.data() + cell(h, s, a) * reward_size, static_cast<std::size_t>(reward_size)};
  }
  std::span<const double> reward_row(int h, int s, int a) const {
    return {reward_probs.data() + cell(h, s, a) * reward_size, static_cast<std::size_t>(reward_size)};
  }

  /// Joint probability of moving from (s, y-index) to (s', y'-index). It
  /// depends on the y indices only through y' - y.
  double joint(int h, int s, int y, int a, int next_s, int next_y) const;
};

/// The discretized environment: the source MDP with each reward distribution
/// replaced by its bin masses on the reward grid.
struct DiscretizedEnv {
  Grid grid{1, 1};
  std::shared_ptr<const TabularRSMDP> mdp;
  FactoredKernel kernel;
};

/// Bin i receives the reward mass of [i/m - 1/(2m), i/m + 1/(2m)] clipped to
/// [0, 1], so the boundary bins are half-width and every vector sums to 1.
DiscretizedEnv discretize(const TabularRSMDP& mdp, const Grid& grid);

/// Policy on continuous cumulative reward: acts as the grid policy at the
/// projected grid point.
class LiftedPolicy {
 public:
  LiftedPolicy() = default;
  explicit LiftedPolicy(DiscretePolicy policy) : policy_(std::move(policy)) {}

  int operator()(int h, int s, double y) const { return policy_.at(h, s, project_y(policy_.grid(), h, y)); }
  const DiscretePolicy& discrete() const { return policy_; }

 private:
  DiscretePolicy policy_;
};

LiftedPolicy lift_policy(const DiscretePolicy& policy, const Grid& grid);

/// Nearest-neighbour extension of a grid value table to continuous y.
class LiftedValue {
 public:
  LiftedValue() = default;
  explicit LiftedValue(ValueTable values) : values_(std::move(values)) {}

  double operator()(int h, int s, double y) const { return values_.at(h, s, project_y(values_.grid(), h, y)); }
  const ValueTable& table() const { return values_; }

 private:
  ValueTable values_;
};

LiftedValue lift_value(const ValueTable& values, const Grid& grid);

}  // namespace riskdp
