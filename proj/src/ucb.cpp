#include "riskdp/ucb.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace riskdp {

LearnerState::LearnerState(int states, int actions, int horizon, int reward_bins)
    : S_(states), A_(actions), H_(horizon), reward_bins_(reward_bins) {
  if (states < 1 || actions < 1 || horizon < 1 || reward_bins < 1) {
    throw std::invalid_argument("LearnerState needs positive dimensions");
  }
  const auto cells = static_cast<std::size_t>(horizon) * states * actions;
  n_sa_.assign(cells, 0);
  n_sas_.assign(cells * states, 0);
  reward_hist_.assign(cells * reward_bins, 0);
}

void LearnerState::record(int h, int s, int a, int next_state, int reward_index) {
  const auto c = cell(h, s, a);
  ++n_sa_[c];
  ++n_sas_[c * S_ + next_state];
  ++reward_hist_[c * reward_bins_ + reward_index];
}

double bonus(std::int64_t visits, double horizon, double kappa, double iota2) {
  if (visits < 1) throw std::invalid_argument("bonus needs a visited pair (N >= 1)");
  return std::sqrt(horizon * horizon * kappa * kappa * iota2 / static_cast<double>(visits));
}

double ucb_iota2(int horizon, int states, int actions, std::int64_t episodes, double p, double eps) {
  const double h = horizon;
  return std::log(16.0 * h * h * states * actions * static_cast<double>(episodes) / (p * eps));
}

QTable ucb_plan(const LearnerState& state, const UtilityFn& u, const Grid& grid, double p, std::int64_t episodes,
                double bonus_scale) {
  const int S = state.states(), A = state.actions(), H = state.horizon();
  if (grid.horizon() != H || grid.reward_size() != state.reward_bins()) {
    throw std::invalid_argument("learner state does not match the grid");
  }
  const double cap = H * u.kappa();
  const double iota2 = ucb_iota2(H, S, A, episodes, p, grid.eps());
  QTable q(grid, S, A, cap);
  ValueTable v(grid, S);
  fill_terminal(v, u);

  std::vector<double> p_state(static_cast<std::size_t>(S));
  std::vector<double> p_reward(static_cast<std::size_t>(grid.reward_size()));
  std::vector<double> column;
  for (int h = H; h >= 1; --h) {
    const int size = grid.y_size(h);
    column.resize(static_cast<std::size_t>(size));
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const std::int64_t n = state.visits(h, s, a);
        if (n == 0) continue;  // stays at the optimistic default H kappa
        const double inv_n = 1.0 / static_cast<double>(n);
        for (int sp = 0; sp < S; ++sp) p_state[sp] = static_cast<double>(state.transitions(h, s, a, sp)) * inv_n;
        for (int i = 0; i < grid.reward_size(); ++i) {
          p_reward[i] = static_cast<double>(state.reward_count(h, s, a, i)) * inv_n;
        }
        bellman_backup(p_state, p_reward, v, h, column);
        const double b = bonus_scale * bonus(n, H, u.kappa(), iota2);
        for (int y = 0; y < size; ++y) q.at(h, s, y, a) = std::min(column[y] + b, cap);
      }
      for (int y = 0; y < size; ++y) v.at(h, s, y) = q.max(h, s, y);
    }
  }
  return q;
}

EpisodeResult run_episode(const TabularRSMDP& mdp, const QTable& q_hat, const Grid& grid, int s1, CounterRng& rng,
                          LearnerState* state) {
  if (s1 < 0 || s1 >= mdp.S) throw std::out_of_range("start state out of range");
  EpisodeResult out;
  auto& traj = out.trajectory;
  traj.steps.reserve(static_cast<std::size_t>(mdp.H));
  traj.cumulative.assign(1, 0.0);
  traj.cumulative_index.assign(1, 0);
  int s = s1;
  int y = 0;
  double y_true = 0.0;
  for (int h = 1; h <= mdp.H; ++h) {
    const int a = q_hat.argmax(h, s, y);
    const auto sample = sample_step(mdp, s, a, h, rng);
    const int r_index = project_r(grid, sample.reward);
    traj.steps.push_back({h, s, a, sample.reward, r_index, sample.next_state});
    if (state) state->record(h, s, a, sample.next_state, r_index);
    y += r_index;
    y_true += sample.reward;
    traj.cumulative.push_back(y_true);
    traj.cumulative_index.push_back(y);
    s = sample.next_state;
  }
  if (state) {
    state->finish_episode();
    traj.episode = state->episode();
  }
  return out;
}

namespace {

int draw_start(const std::vector<double>& dist, CounterRng& rng) {
  if (dist.empty()) return 0;
  const double u = rng.uniform();
  double acc = 0.0;
  int last = 0;
  for (std::size_t s = 0; s < dist.size(); ++s) {
    if (dist[s] <= 0.0) continue;
    acc += dist[s];
    last = static_cast<int>(s);
    if (u < acc) break;
  }
  return last;
}

}  // namespace

RegretTrace vigu_ucb(const TabularRSMDP& mdp, const UtilityFn& u, const Grid& grid, const UcbOptions& options,
                     std::uint64_t seed) {
  if (options.episodes < 1) throw std::invalid_argument("vigu_ucb needs at least one episode");
  if (!(options.p > 0.0 && options.p < 1.0)) throw std::invalid_argument("failure probability p must lie in (0, 1)");
  if (!options.initial_distribution.empty()) {
    if (static_cast<int>(options.initial_distribution.size()) != mdp.S) {
      throw std::invalid_argument("initial distribution must have one entry per state");
    }
    double total = 0.0;
    for (double w : options.initial_distribution) {
      if (w < 0.0) throw std::invalid_argument("initial distribution has a negative entry");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("initial distribution must sum to 1");
  }

  const auto env = discretize(mdp, grid);
  const auto optimal = solve_optimal(env, u);

  RegretTrace trace;
  trace.seed = seed;
  trace.m = grid.m();
  trace.episodes = options.episodes;
  trace.p = options.p;
  trace.iota2 = ucb_iota2(mdp.H, mdp.S, mdp.A, options.episodes, options.p, grid.eps());

  if (options.mc_every > 0) {
    const Grid fine(grid.m() * options.fine_multiplier, mdp.H);
    const auto fine_opt = solve_optimal(discretize(mdp, fine), u);
    for (int s = 0; s < mdp.S; ++s) trace.reference_opt.push_back(fine_opt.value.at(1, s, 0));
  }

  const CounterRng root(seed);
  CounterRng start_rng = root.split(1);
  LearnerState state(mdp.S, mdp.A, mdp.H, grid.reward_size());
  trace.records.reserve(static_cast<std::size_t>(options.episodes));
  double cumulative = 0.0;
  for (std::int64_t k = 1; k <= options.episodes; ++k) {
    const QTable q_hat = ucb_plan(state, u, grid, options.p, options.episodes, options.bonus_scale);
    if (options.on_plan) options.on_plan(k, q_hat);
    const DiscretePolicy policy = DiscretePolicy::greedy(q_hat);
    const int s1 = draw_start(options.initial_distribution, start_rng);

    RegretRecord rec;
    rec.k = k;
    rec.s1 = s1;
    rec.v_opt = optimal.value.at(1, s1, 0);
    rec.v_pik = evaluate_policy(env, u, policy).at(1, s1, 0);
    rec.regret = rec.v_opt - rec.v_pik;
    cumulative += rec.regret;
    rec.cum_regret = cumulative;
    if (options.mc_every > 0 && k % options.mc_every == 0) {
      CounterRng mc_rng = root.split(3, static_cast<std::uint64_t>(k));
      const auto est = mc_policy_value(mdp, u, lift_policy(policy, grid), s1, options.mc_trials, mc_rng);
      rec.mc_value = est.mean;
      rec.mc_ci = est.ci_half_width;
    }

    CounterRng episode_rng = root.split(2, static_cast<std::uint64_t>(k));
    run_episode(mdp, q_hat, grid, s1, episode_rng, &state);
    trace.records.push_back(rec);
  }
  return trace;
}

int recommended_eps(int horizon, int states, int actions, double total_steps, double kappa, double lambda,
                    double eta) {
  if (horizon < 1 || states < 1 || actions < 1 || !(total_steps > 0.0) || !(kappa > 0.0)) {
    throw std::invalid_argument("recommended_eps needs positive H, S, A, T and kappa");
  }
  const double regularity = lambda + eta;
  if (!(lambda >= 0.0) || !(eta >= 0.0) || !(regularity > 0.0) || !std::isfinite(regularity)) {
    std::ostringstream msg;
    msg << "recommended_eps needs finite lambda + eta > 0 (got lambda=" << lambda << ", eta=" << eta << ")";
    throw std::invalid_argument(msg.str());
  }
  const double h = horizon;
  const double s = states;
  double eps = std::sqrt(h * h * s * s * actions / (total_steps * kappa * regularity));
  eps = std::min(eps, 1.0);
  return std::max(1, static_cast<int>(std::lround(1.0 / eps)));
}

}  // namespace riskdp
