#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "riskdp/dp.hpp"
#include "riskdp/grid.hpp"
#include "riskdp/mdp.hpp"
#include "riskdp/rng.hpp"
#include "riskdp/utility.hpp"

namespace riskdp {

/// Sufficient statistics of the episodes seen so far: transition counts,
/// visit counts and per-bin counts of projected rewards for every (h, s, a).
class LearnerState {
 public:
  LearnerState(int states, int actions, int horizon, int reward_bins);

  /// Records one observed step (h, s, a) -> (s', reward bin).
  void record(int h, int s, int a, int next_state, int reward_index);

  std::int64_t visits(int h, int s, int a) const { return n_sa_[cell(h, s, a)]; }
  std::int64_t transitions(int h, int s, int a, int next_state) const {
    return n_sas_[cell(h, s, a) * S_ + next_state];
  }
  std::int64_t reward_count(int h, int s, int a, int bin) const {
    return reward_hist_[cell(h, s, a) * reward_bins_ + bin];
  }
  bool visited(int h, int s, int a) const { return visits(h, s, a) > 0; }

  int states() const { return S_; }
  int actions() const { return A_; }
  int horizon() const { return H_; }
  int reward_bins() const { return reward_bins_; }

  /// Episodes completed so far.
  std::int64_t episode() const { return episode_; }
  void finish_episode() { ++episode_; }

 private:
  std::size_t cell(int h, int s, int a) const { return (static_cast<std::size_t>(h - 1) * S_ + s) * A_ + a; }

  int S_, A_, H_, reward_bins_;
  std::vector<std::int64_t> n_sas_;
  std::vector<std::int64_t> n_sa_;
  std::vector<std::int64_t> reward_hist_;
  std::int64_t episode_ = 0;
};

/// Hoeffding bonus sqrt(H^2 kappa^2 iota2 / N). Throws for N < 1.
double bonus(std::int64_t visits, double horizon, double kappa, double iota2);

/// log(16 H^2 S A K / (p eps)).
double ucb_iota2(int horizon, int states, int actions, std::int64_t episodes, double p, double eps);

/// Optimistic Q table: for visited (s, a),
///   min{ empirical backup of V-hat_{h+1} + bonus, H kappa },
/// and H kappa for unvisited pairs; V-hat_h = max_a Q-hat_h.
QTable ucb_plan(const LearnerState& state, const UtilityFn& u, const Grid& grid, double p, std::int64_t episodes,
                double bonus_scale = 1.0);

struct EpisodeResult {
  Trajectory trajectory;
};

/// Acts greedily on q_hat for one episode, tracking cumulative reward on the
/// grid through projected rewards. Records the steps into `state` when given.
EpisodeResult run_episode(const TabularRSMDP& mdp, const QTable& q_hat, const Grid& grid, int s1, CounterRng& rng,
                          LearnerState* state = nullptr);

struct RegretRecord {
  std::int64_t k = 0;
  int s1 = 0;
  double v_opt = 0.0;
  double v_pik = 0.0;
  double regret = 0.0;
  double cum_regret = 0.0;
  double mc_value = std::numeric_limits<double>::quiet_NaN();
  double mc_ci = std::numeric_limits<double>::quiet_NaN();
};

struct RegretTrace {
  std::vector<RegretRecord> records;
  std::uint64_t seed = 0;
  int m = 0;
  std::int64_t episodes = 0;
  double p = 0.0;
  double iota2 = 0.0;
  /// Fine-grid optimal value used as the original-environment reference,
  /// per start state; empty when MC scoring was off.
  std::vector<double> reference_opt;
};

struct UcbOptions {
  std::int64_t episodes = 1;
  double p = 0.1;
  /// Start-state distribution; empty means the fixed start state 0.
  std::vector<double> initial_distribution;
  /// Score Gamma(pi^k) by Monte Carlo every `mc_every` episodes (0 = never).
  std::int64_t mc_every = 0;
  std::int64_t mc_trials = 10000;
  int fine_multiplier = 64;
  /// Multiplies the bonus; 1 is the algorithm as stated, 0 disables it (tests).
  double bonus_scale = 1.0;
  /// Called with (k, Q-hat) right after planning in episode k.
  std::function<void(std::int64_t, const QTable&)> on_plan;
};

/// Episodic learning loop. Regret of episode k is
///   V-bar*_1(s_1^k, 0) - V-bar^{pi^k}_1(s_1^k, 0)
/// with pi^k the greedy policy of the Q table used to act in episode k,
/// both computed exactly in the discretized environment.
RegretTrace vigu_ucb(const TabularRSMDP& mdp, const UtilityFn& u, const Grid& grid, const UcbOptions& options,
                     std::uint64_t seed);

/// m = max(1, round(1/eps)) with eps = sqrt(H^2 S^2 A / (T kappa (lambda + eta))),
/// clamped to eps <= 1.
int recommended_eps(int horizon, int states, int actions, double total_steps, double kappa, double lambda,
                    double eta);

}  // namespace riskdp
