#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "riskdp/rng.hpp"

namespace riskdp {

/// Reward distribution on [0, 1].
///
/// Three families: uniform on [lo, hi], a continuous piecewise-linear density
/// (zero outside its knot range), and a point mass. The point mass has no
/// density and is meant for exact-arithmetic tests only.
///
/// Construction does not validate; invalid distributions are reported by
/// violations() so validate_mdp can list every problem at once.
class RewardDist {
 public:
  struct Uniform {
    double lo = 0.0;
    double hi = 1.0;
  };
  struct PiecewiseDensity {
    std::vector<double> r;  // strictly increasing knot positions
    std::vector<double> f;  // density values at the knots
  };
  struct PointMass {
    double r0 = 0.0;
  };

  RewardDist() : family_(Uniform{0.0, 1.0}) {}

  static RewardDist uniform(double lo = 0.0, double hi = 1.0);
  static RewardDist piecewise_linear(std::vector<std::pair<double, double>> knots);
  /// Triangular density on [lo, hi] with its mode at `peak`.
  static RewardDist triangular(double lo, double peak, double hi);
  static RewardDist point_mass(double r0);

  bool is_uniform() const { return std::holds_alternative<Uniform>(family_); }
  bool is_piecewise() const { return std::holds_alternative<PiecewiseDensity>(family_); }
  bool is_point_mass() const { return std::holds_alternative<PointMass>(family_); }
  /// False only for the point mass.
  bool has_density() const { return !is_point_mass(); }

  const auto& family() const { return family_; }

  /// P(r <= x), clipped to [0, 1].
  double cdf(double x) const;
  /// Probability of [lo, hi]; lo > hi throws std::invalid_argument.
  double mass(double lo, double hi) const;
  /// Inverse-CDF transform of a uniform draw u in [0, 1).
  double quantile(double u) const;
  double mean() const;
  /// Lipschitz constant of the density on [0, 1]; +inf for jumps inside [0, 1]
  /// and for the point mass.
  double lambda() const;
  /// Supremum of the density; +inf for the point mass.
  double eta() const;

  std::vector<std::string> violations() const;

 private:
  std::variant<Uniform, PiecewiseDensity, PointMass> family_;
  std::vector<double> cum_;  // piecewise: CDF at each knot
};

/// Exact probability mass of [lo, hi] intersected with [0, 1].
double reward_mass(const RewardDist& dist, double lo, double hi);

/// Finite-horizon risk-sensitive MDP with tabular states and actions.
/// Timestamps h are 1-based (h in [1, H]); states and actions are 0-based.
struct TabularRSMDP {
  int S = 0;
  int A = 0;
  int H = 0;
  std::vector<double> trans;        // [(h-1)][s][a][s'], row-major
  std::vector<RewardDist> rewards;  // [(h-1)][s][a]

  TabularRSMDP() = default;
  /// All rows start as zero vectors and all rewards as uniform[0, 1].
  TabularRSMDP(int states, int actions, int horizon);

  std::size_t cell(int h, int s, int a) const {
    return (static_cast<std::size_t>(h - 1) * S + s) * A + a;
  }
  std::span<double> row(int h, int s, int a) {
    return {trans.data() + cell(h, s, a) * S, static_cast<std::size_t>(S)};
  }
  std::span<const double> row(int h, int s, int a) const {
    return {trans.data() + cell(h, s, a) * S, static_cast<std::size_t>(S)};
  }
  RewardDist& reward(int h, int s, int a) { return rewards[cell(h, s, a)]; }
  const RewardDist& reward(int h, int s, int a) const { return rewards[cell(h, s, a)]; }

  double lambda_max() const;
  double eta_max() const;
  /// True when any reward is a point mass.
  bool test_mode() const;
};

/// Empty when every invariant holds; otherwise one message per violation,
/// each naming its (h, s, a) cell.
std::vector<std::string> validate_mdp(const TabularRSMDP& mdp);

struct StepSample {
  int next_state = 0;
  double reward = 0.0;
};

/// One draw from the simulator: s' ~ P_h(.|s,a), r ~ R_h(.|s,a).
/// Uses exactly two uniforms from `rng`. Throws std::out_of_range on bad indices.
StepSample sample_step(const TabularRSMDP& mdp, int s, int a, int h, CounterRng& rng);

struct TrajectoryStep {
  int h = 0;
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int reward_index = 0;  // grid projection of reward
  int next_state = 0;
};

/// One episode. cumulative[h-1] is the true cumulative reward before step h
/// and cumulative_index[h-1] the grid-tracked one (both have H + 1 entries).
struct Trajectory {
  std::int64_t episode = 0;
  std::vector<TrajectoryStep> steps;
  std::vector<double> cumulative;
  std::vector<int> cumulative_index;
};

enum class GeneratorKind { kChain, kRandom, kSafeRiskyBandit };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::kChain;
  int horizon = 3;
  int length = 2;       // chain
  int states = 2;       // random
  int actions = 2;      // random
  std::uint64_t seed = 0;
  bool grid_rewards = false;  // random: point-mass rewards on the grid (test mode)
  int grid_m = 2;             // random, grid_rewards only
};

/// Benchmark environments; the result always passes validate_mdp.
/// Throws std::invalid_argument on invalid parameters.
TabularRSMDP gen_mdp(const GeneratorSpec& spec);

}  // namespace riskdp
