#include "riskdp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace riskdp {

namespace {

constexpr double kSlack = 1e-9;

// Nearest of {0, 1/m, ..., top/m} to x, ties to the smaller point. Distances
// are compared on x * m so midpoints such as 0.5 with m = 3 tie exactly.
int nearest_index(int m, int top, double x) {
  const double scaled = x * m;
  int lo = static_cast<int>(std::floor(scaled));
  lo = std::clamp(lo, 0, top);
  if (lo == top) return top;
  return scaled - lo > 0.5 ? lo + 1 : lo;
}

}  // namespace

Grid::Grid(int m, int horizon) : m_(m), horizon_(horizon) {
  if (m < 1) throw std::invalid_argument("grid resolution m must be >= 1");
  if (horizon < 1) throw std::invalid_argument("grid horizon must be >= 1");
}

int project_r(const Grid& grid, double r) {
  if (!(r >= -kSlack && r <= 1.0 + kSlack)) {
    std::ostringstream msg;
    msg << "reward r=" << r << " outside [0, 1]";
    throw std::out_of_range(msg.str());
  }
  return nearest_index(grid.m(), grid.m(), std::clamp(r, 0.0, 1.0));
}

int project_y(const Grid& grid, int h, double y) {
  if (h < 1 || h > grid.horizon() + 1) {
    std::ostringstream msg;
    msg << "timestamp h=" << h << " outside [1, " << grid.horizon() + 1 << "]";
    throw std::out_of_range(msg.str());
  }
  const double top = static_cast<double>(h - 1);
  if (!(y >= -kSlack && y <= top + kSlack)) {
    std::ostringstream msg;
    msg << "cumulative reward y=" << y << " outside [0, " << top << "] at h=" << h;
    throw std::out_of_range(msg.str());
  }
  return nearest_index(grid.m(), grid.y_size(h) - 1, std::clamp(y, 0.0, top));
}

ValueTable::ValueTable(const Grid& grid, int states) : grid_(grid), states_(states) {
  data_.resize(grid.horizon() + 1);
  for (int h = 1; h <= grid.horizon() + 1; ++h) {
    data_[h - 1].assign(static_cast<std::size_t>(states) * grid.y_size(h), 0.0);
  }
}

QTable::QTable(const Grid& grid, int states, int actions, double fill)
    : grid_(grid), states_(states), actions_(actions) {
  data_.resize(grid.horizon());
  for (int h = 1; h <= grid.horizon(); ++h) {
    data_[h - 1].assign(static_cast<std::size_t>(states) * grid.y_size(h) * actions, fill);
  }
}

int QTable::argmax(int h, int s, int y) const {
  int best = 0;
  double best_value = at(h, s, y, 0);
  for (int a = 1; a < actions_; ++a) {
    const double v = at(h, s, y, a);
    if (v > best_value) {
      best_value = v;
      best = a;
    }
  }
  return best;
}

double QTable::max(int h, int s, int y) const { return at(h, s, y, argmax(h, s, y)); }

DiscretePolicy::DiscretePolicy(const Grid& grid, int states, int fill_action) : grid_(grid), states_(states) {
  data_.resize(grid.horizon());
  for (int h = 1; h <= grid.horizon(); ++h) {
    data_[h - 1].assign(static_cast<std::size_t>(states) * grid.y_size(h), fill_action);
  }
}

DiscretePolicy DiscretePolicy::greedy(const QTable& q) {
  DiscretePolicy pol(q.grid(), q.states());
  for (int h = 1; h <= q.grid().horizon(); ++h) {
    for (int s = 0; s < q.states(); ++s) {
      for (int y = 0; y < q.grid().y_size(h); ++y) pol.at(h, s, y) = q.argmax(h, s, y);
    }
  }
  return pol;
}

FactoredKernel::FactoredKernel(int states, int actions, int horizon, int reward_bins)
    : S(states), A(actions), H(horizon), reward_size(reward_bins) {
  const auto cells = static_cast<std::size_t>(horizon) * states * actions;
  state_probs.assign(cells * states, 0.0);
  reward_probs.assign(cells * reward_bins, 0.0);
}

double FactoredKernel::joint(int h, int s, int y, int a, int next_s, int next_y) const {
  const int shift = next_y - y;
  if (shift < 0 || shift >= reward_size) return 0.0;
  return states_row(h, s, a)[next_s] * reward_row(h, s, a)[shift];
}

DiscretizedEnv discretize(const TabularRSMDP& mdp, const Grid& grid) {
  if (grid.horizon() != mdp.H) {
    throw std::invalid_argument("grid horizon does not match the MDP horizon");
  }
  if (const auto v = validate_mdp(mdp); !v.empty()) {
    throw std::invalid_argument("cannot discretize an invalid MDP: " + v.front());
  }
  DiscretizedEnv env;
  env.grid = grid;
  env.mdp = std::make_shared<const TabularRSMDP>(mdp);
  env.kernel = FactoredKernel(mdp.S, mdp.A, mdp.H, grid.reward_size());
  const double half = 0.5 * grid.eps();
  for (int h = 1; h <= mdp.H; ++h) {
    for (int s = 0; s < mdp.S; ++s) {
      for (int a = 0; a < mdp.A; ++a) {
        const auto src = mdp.row(h, s, a);
        std::copy(src.begin(), src.end(), env.kernel.states_row(h, s, a).begin());
        const auto& dist = mdp.reward(h, s, a);
        auto bins = env.kernel.reward_row(h, s, a);
        for (int i = 0; i < grid.reward_size(); ++i) {
          const double centre = grid.value(i);
          // The first bin also owns r = 0 itself, matching project_r.
          const double lo = i == 0 ? -1.0 : centre - half;
          const double hi = i == grid.m() ? 2.0 : centre + half;
          bins[i] = reward_mass(dist, lo, hi);
        }
      }
    }
  }
  return env;
}

LiftedPolicy lift_policy(const DiscretePolicy& policy, const Grid& grid) {
  if (!(policy.grid() == grid)) throw std::invalid_argument("policy was built on a different grid");
  return LiftedPolicy(policy);
}

LiftedValue lift_value(const ValueTable& values, const Grid& grid) {
  if (!(values.grid() == grid)) throw std::invalid_argument("value table was built on a different grid");
  return LiftedValue(values);
}

}  // namespace riskdp
