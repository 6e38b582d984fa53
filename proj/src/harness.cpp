#include "riskdp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <mutex>
#include <sstream>
#include <string_view>
#include <thread>

#include "riskdp/dp.hpp"
#include "riskdp/error.hpp"
#include "riskdp/grid.hpp"
#include "riskdp/ucb.hpp"
#include "riskdp/vigu.hpp"

namespace riskdp {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& message) { throw ConfigError(message); }

std::string field_path(std::string_view where, std::string_view key) {
  return where.empty() ? std::string(key) : std::string(where) + "." + std::string(key);
}

void require_object(const json& j, std::string_view where) {
  if (!j.is_object()) fail("\"" + std::string(where.empty() ? "config" : where) + "\" must be a JSON object");
}

void check_fields(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail("unknown field \"" + field_path(where, key) + "\"");
    }
  }
}

std::int64_t get_int(const json& j, std::string_view key, std::string_view where, std::int64_t min_value) {
  const auto& v = j.at(std::string(key));
  if (!v.is_number_integer() || v.get<std::int64_t>() < min_value) {
    fail("field \"" + field_path(where, key) + "\" must be an integer >= " + std::to_string(min_value));
  }
  return v.get<std::int64_t>();
}

double get_double(const json& j, std::string_view key, std::string_view where) {
  const auto& v = j.at(std::string(key));
  if (!v.is_number()) fail("field \"" + field_path(where, key) + "\" must be a number");
  return v.get<double>();
}

std::string get_string(const json& j, std::string_view key, std::string_view where) {
  const auto& v = j.at(std::string(key));
  if (!v.is_string()) fail("field \"" + field_path(where, key) + "\" must be a string");
  return v.get<std::string>();
}

bool get_bool(const json& j, std::string_view key, std::string_view where) {
  const auto& v = j.at(std::string(key));
  if (!v.is_boolean()) fail("field \"" + field_path(where, key) + "\" must be true or false");
  return v.get<bool>();
}

std::vector<std::pair<double, double>> get_pairs(const json& j, std::string_view key, std::string_view where) {
  const auto& v = j.at(std::string(key));
  std::vector<std::pair<double, double>> out;
  if (!v.is_array()) fail("field \"" + field_path(where, key) + "\" must be an array of [x, y] pairs");
  for (const auto& item : v) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number()) {
      fail("field \"" + field_path(where, key) + "\" must be an array of [x, y] pairs");
    }
    out.emplace_back(item[0].get<double>(), item[1].get<double>());
  }
  return out;
}

GeneratorSpec parse_generator(const json& j) {
  check_fields(j, {"kind", "seed", "H", "length", "S", "A", "grid_rewards", "grid_m"}, "mdp");
  if (!j.contains("kind")) fail("field \"mdp.kind\" is required");
  GeneratorSpec g;
  const auto kind = get_string(j, "kind", "mdp");
  if (kind == "chain") {
    g.kind = GeneratorKind::kChain;
  } else if (kind == "random") {
    g.kind = GeneratorKind::kRandom;
  } else if (kind == "safe_risky_bandit") {
    g.kind = GeneratorKind::kSafeRiskyBandit;
    g.horizon = 1;
  } else {
    fail("field \"mdp.kind\" must be chain, random or safe_risky_bandit (got \"" + kind + "\")");
  }
  if (j.contains("seed")) g.seed = static_cast<std::uint64_t>(get_int(j, "seed", "mdp", 0));
  if (j.contains("H")) g.horizon = static_cast<int>(get_int(j, "H", "mdp", 1));
  if (j.contains("length")) g.length = static_cast<int>(get_int(j, "length", "mdp", 2));
  if (j.contains("S")) g.states = static_cast<int>(get_int(j, "S", "mdp", 1));
  if (j.contains("A")) g.actions = static_cast<int>(get_int(j, "A", "mdp", 1));
  if (j.contains("grid_rewards")) g.grid_rewards = get_bool(j, "grid_rewards", "mdp");
  if (j.contains("grid_m")) g.grid_m = static_cast<int>(get_int(j, "grid_m", "mdp", 1));
  return g;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

template <typename F>
void parallel_for(std::size_t count, F&& body) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

CsvCell timing_cell(const ExperimentConfig& cfg, double ms) { return cfg.timing ? CsvCell{ms} : CsvCell{}; }

std::vector<double> start_weights(const ExperimentConfig& cfg) {
  if (!cfg.initial_distribution.empty()) return cfg.initial_distribution;
  std::vector<double> w(static_cast<std::size_t>(cfg.mdp.S), 0.0);
  w[0] = 1.0;
  return w;
}

}  // namespace

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kSolve: return "solve";
    case Algorithm::kVigu: return "vigu";
    case Algorithm::kUcb: return "ucb";
    case Algorithm::kSweep: return "sweep";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "solve") return Algorithm::kSolve;
  if (name == "vigu") return Algorithm::kVigu;
  if (name == "ucb") return Algorithm::kUcb;
  if (name == "sweep") return Algorithm::kSweep;
  fail("unknown algorithm \"" + name + "\" (expected solve, vigu, ucb or sweep)");
}

UtilitySpec parse_utility_spec(const json& j) {
  require_object(j, "utility");
  if (!j.contains("kind")) fail("field \"utility.kind\" is required");
  const auto kind = get_string(j, "kind", "utility");
  UtilitySpec spec;
  if (kind == "linear") {
    check_fields(j, {"kind", "slope"}, "utility");
    spec = UtilitySpec::linear(j.contains("slope") ? get_double(j, "slope", "utility") : 1.0);
  } else if (kind == "exponential") {
    check_fields(j, {"kind", "beta"}, "utility");
    if (!j.contains("beta")) fail("field \"utility.beta\" is required for exponential utility");
    spec = UtilitySpec::exponential(get_double(j, "beta", "utility"));
  } else if (kind == "crra") {
    check_fields(j, {"kind", "gamma", "shift"}, "utility");
    if (!j.contains("gamma")) fail("field \"utility.gamma\" is required for crra utility");
    spec = UtilitySpec::crra(get_double(j, "gamma", "utility"),
                             j.contains("shift") ? get_double(j, "shift", "utility") : 0.05);
  } else if (kind == "piecewise_linear") {
    check_fields(j, {"kind", "knots"}, "utility");
    if (!j.contains("knots")) fail("field \"utility.knots\" is required for piecewise_linear utility");
    spec = UtilitySpec::piecewise_linear(get_pairs(j, "knots", "utility"));
  } else {
    fail("field \"utility.kind\" must be linear, exponential, crra or piecewise_linear (got \"" + kind + "\")");
  }
  return spec;
}

RewardDist parse_reward_dist(const json& j) {
  constexpr std::string_view where = "mdp.rewards[]";
  require_object(j, where);
  if (!j.contains("family")) fail("field \"mdp.rewards[].family\" is required");
  const auto family = get_string(j, "family", where);
  if (family == "uniform") {
    check_fields(j, {"family", "lo", "hi"}, where);
    return RewardDist::uniform(j.contains("lo") ? get_double(j, "lo", where) : 0.0,
                               j.contains("hi") ? get_double(j, "hi", where) : 1.0);
  }
  if (family == "triangular") {
    check_fields(j, {"family", "lo", "peak", "hi"}, where);
    for (const char* key : {"lo", "peak", "hi"}) {
      if (!j.contains(key)) fail("field \"mdp.rewards[]." + std::string(key) + "\" is required for triangular");
    }
    const double lo = get_double(j, "lo", where), peak = get_double(j, "peak", where), hi = get_double(j, "hi", where);
    if (!(lo <= peak && peak <= hi && lo < hi)) fail("triangular reward needs lo <= peak <= hi and lo < hi");
    return RewardDist::triangular(lo, peak, hi);
  }
  if (family == "piecewise_linear") {
    check_fields(j, {"family", "knots"}, where);
    if (!j.contains("knots")) fail("field \"mdp.rewards[].knots\" is required for piecewise_linear");
    return RewardDist::piecewise_linear(get_pairs(j, "knots", where));
  }
  if (family == "point_mass") {
    check_fields(j, {"family", "r0"}, where);
    if (!j.contains("r0")) fail("field \"mdp.rewards[].r0\" is required for point_mass");
    return RewardDist::point_mass(get_double(j, "r0", where));
  }
  fail("field \"mdp.rewards[].family\" must be uniform, triangular, piecewise_linear or point_mass");
}

TabularRSMDP parse_mdp(const json& j) {
  require_object(j, "mdp");
  if (j.contains("kind")) {
    try {
      return gen_mdp(parse_generator(j));
    } catch (const std::invalid_argument& e) {
      fail(std::string("mdp generator: ") + e.what());
    }
  }
  check_fields(j, {"S", "A", "H", "trans", "rewards"}, "mdp");
  for (const char* key : {"S", "A", "H", "trans", "rewards"}) {
    if (!j.contains(key)) fail("field \"mdp." + std::string(key) + "\" is required");
  }
  const int S = static_cast<int>(get_int(j, "S", "mdp", 1));
  const int A = static_cast<int>(get_int(j, "A", "mdp", 1));
  const int H = static_cast<int>(get_int(j, "H", "mdp", 1));
  TabularRSMDP mdp(S, A, H);
  const auto& trans = j.at("trans");
  const auto& rewards = j.at("rewards");
  auto shape_error = [](const std::string& what) {
    fail("field \"mdp." + what + "\" must be nested arrays of shape [H][S][A]" +
         (what == "trans" ? std::string("[S]") : std::string()));
  };
  if (!trans.is_array() || static_cast<int>(trans.size()) != H) shape_error("trans");
  if (!rewards.is_array() || static_cast<int>(rewards.size()) != H) shape_error("rewards");
  for (int h = 1; h <= H; ++h) {
    const auto& th = trans[h - 1];
    const auto& rh = rewards[h - 1];
    if (!th.is_array() || static_cast<int>(th.size()) != S) shape_error("trans");
    if (!rh.is_array() || static_cast<int>(rh.size()) != S) shape_error("rewards");
    for (int s = 0; s < S; ++s) {
      if (!th[s].is_array() || static_cast<int>(th[s].size()) != A) shape_error("trans");
      if (!rh[s].is_array() || static_cast<int>(rh[s].size()) != A) shape_error("rewards");
      for (int a = 0; a < A; ++a) {
        const auto& row = th[s][a];
        if (!row.is_array() || static_cast<int>(row.size()) != S) shape_error("trans");
        for (int sp = 0; sp < S; ++sp) {
          if (!row[sp].is_number()) shape_error("trans");
          mdp.row(h, s, a)[sp] = row[sp].get<double>();
        }
        mdp.reward(h, s, a) = parse_reward_dist(rh[s][a]);
      }
    }
  }
  if (const auto violations = validate_mdp(mdp); !violations.empty()) {
    std::string msg = "invalid mdp:";
    for (const auto& v : violations) msg += "\n  " + v;
    fail(msg);
  }
  return mdp;
}

std::string config_hash(const json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

json read_config_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config file " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream msg;
    msg << path << ":" << line << ":" << column << ": JSON parse error: " << e.what();
    fail(msg.str());
  }
}

ExperimentConfig parse_config(const json& doc) {
  require_object(doc, "");
  check_fields(doc,
               {"algorithm", "mdp", "utility", "grid_m", "n", "episodes", "p", "seeds", "sweep",
                "fine_grid_multiplier", "mc_trials", "mc_every", "initial_distribution", "timing", "out",
                "values_out"},
               "");
  ExperimentConfig cfg;
  cfg.source = doc;
  cfg.hash = config_hash(doc);

  if (!doc.contains("algorithm")) fail("field \"algorithm\" is required");
  cfg.algorithm = parse_algorithm(get_string(doc, "algorithm", ""));
  if (!doc.contains("mdp")) fail("field \"mdp\" is required");
  cfg.mdp = parse_mdp(doc.at("mdp"));
  if (!doc.contains("utility")) fail("field \"utility\" is required");
  cfg.utility = parse_utility_spec(doc.at("utility"));
  try {
    (void)make_utility(cfg.utility, cfg.mdp.H);
  } catch (const std::invalid_argument& e) {
    fail(std::string("utility: ") + e.what());
  }

  if (cfg.algorithm == Algorithm::kSweep) {
    if (!doc.contains("sweep")) fail("field \"sweep\" is required for algorithm sweep");
    const auto& sw = doc.at("sweep");
    require_object(sw, "sweep");
    check_fields(sw, {"algorithm", "values"}, "sweep");
    if (!sw.contains("algorithm") || !sw.contains("values")) fail("\"sweep\" needs \"algorithm\" and \"values\"");
    cfg.sweep_algorithm = parse_algorithm(get_string(sw, "algorithm", "sweep"));
    if (cfg.sweep_algorithm != Algorithm::kVigu && cfg.sweep_algorithm != Algorithm::kUcb) {
      fail("field \"sweep.algorithm\" must be vigu or ucb");
    }
    const auto& values = sw.at("values");
    if (!values.is_array() || values.empty()) fail("field \"sweep.values\" must be a non-empty array");
    for (const auto& v : values) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 1) fail("field \"sweep.values\" must hold integers >= 1");
      cfg.sweep_values.push_back(v.get<std::int64_t>());
    }
  } else if (doc.contains("sweep")) {
    fail("field \"sweep\" is only valid with algorithm sweep");
  }
  const Algorithm effective = cfg.algorithm == Algorithm::kSweep ? cfg.sweep_algorithm : cfg.algorithm;

  if (!doc.contains("grid_m")) fail("field \"grid_m\" is required");
  if (const auto& gm = doc.at("grid_m"); gm.is_string()) {
    if (gm.get<std::string>() != "auto") fail("field \"grid_m\" must be a positive integer or \"auto\"");
    if (effective != Algorithm::kUcb) fail("\"grid_m\": \"auto\" is only supported for ucb runs");
  } else {
    cfg.grid_m = static_cast<int>(get_int(doc, "grid_m", "", 1));
  }

  if (doc.contains("n")) cfg.n = get_int(doc, "n", "", 1);
  if (doc.contains("episodes")) cfg.episodes = get_int(doc, "episodes", "", 1);
  if (doc.contains("p")) cfg.p = get_double(doc, "p", "");
  if (!(cfg.p > 0.0 && cfg.p < 1.0)) fail("field \"p\" must lie in (0, 1)");
  if (effective == Algorithm::kVigu && cfg.algorithm != Algorithm::kSweep && !doc.contains("n")) {
    fail("field \"n\" is required for algorithm vigu");
  }
  if (effective == Algorithm::kUcb && cfg.algorithm != Algorithm::kSweep && !doc.contains("episodes")) {
    fail("field \"episodes\" is required for algorithm ucb");
  }

  if (!doc.contains("seeds")) fail("field \"seeds\" is required");
  const auto& seeds = doc.at("seeds");
  if (!seeds.is_array() || seeds.empty()) fail("field \"seeds\" must be a non-empty array");
  for (const auto& s : seeds) {
    if (!s.is_number_integer() || s.get<std::int64_t>() < 0) fail("field \"seeds\" must hold non-negative integers");
    cfg.seeds.push_back(s.get<std::uint64_t>());
  }

  if (doc.contains("fine_grid_multiplier")) {
    cfg.fine_multiplier = static_cast<int>(get_int(doc, "fine_grid_multiplier", "", 1));
  }
  if (doc.contains("mc_trials")) cfg.mc_trials = get_int(doc, "mc_trials", "", 0);
  if (doc.contains("mc_every")) cfg.mc_every = get_int(doc, "mc_every", "", 0);
  if (doc.contains("timing")) cfg.timing = get_bool(doc, "timing", "");
  if (doc.contains("out")) cfg.out = get_string(doc, "out", "");
  if (doc.contains("values_out")) cfg.values_out = get_string(doc, "values_out", "");
  if (doc.contains("initial_distribution")) {
    const auto& d = doc.at("initial_distribution");
    if (!d.is_array() || static_cast<int>(d.size()) != cfg.mdp.S) {
      fail("field \"initial_distribution\" must hold one probability per state");
    }
    double total = 0.0;
    for (const auto& w : d) {
      if (!w.is_number() || w.get<double>() < 0.0) fail("field \"initial_distribution\" must be non-negative");
      cfg.initial_distribution.push_back(w.get<double>());
      total += w.get<double>();
    }
    if (std::abs(total - 1.0) > 1e-9) fail("field \"initial_distribution\" must sum to 1");
  }
  if (!cfg.grid_m) {
    const double lam = cfg.mdp.lambda_max(), eta = cfg.mdp.eta_max();
    if (!std::isfinite(lam) || !std::isfinite(eta)) {
      fail("\"grid_m\": \"auto\" needs reward densities with finite lambda and eta");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_config_json(path)); }

int resolve_grid_m(const ExperimentConfig& cfg, std::int64_t episodes) {
  if (cfg.grid_m) return *cfg.grid_m;
  const auto u = make_utility(cfg.utility, cfg.mdp.H);
  const double total_steps = static_cast<double>(cfg.mdp.H) * static_cast<double>(episodes);
  return recommended_eps(cfg.mdp.H, cfg.mdp.S, cfg.mdp.A, total_steps, u.kappa(), cfg.mdp.lambda_max(),
                         cfg.mdp.eta_max());
}

int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("RISKDP_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return std::min(cap, hw);
  }
  return hw;
}

namespace {

ResultTable run_solve(const ExperimentConfig& cfg) {
  const auto u = make_utility(cfg.utility, cfg.mdp.H);
  const Grid grid(*cfg.grid_m, cfg.mdp.H);
  ResultTable table;
  table.columns = {"config_hash", "seed", "m", "s", "y_index", "optimal_action", "v_opt", "wall_ms"};
  const auto start = std::chrono::steady_clock::now();
  const auto sol = solve_optimal(discretize(cfg.mdp, grid), u);
  const double ms = elapsed_ms(start);
  if (!cfg.values_out.empty()) write_value_csv(sol.value, &sol.policy, cfg.values_out);
  for (const auto seed : cfg.seeds) {
    for (int s = 0; s < cfg.mdp.S; ++s) {
      table.rows.push_back({cfg.hash, static_cast<std::int64_t>(seed), std::int64_t{grid.m()}, std::int64_t{s},
                            std::int64_t{0}, std::int64_t{sol.policy.at(1, s, 0)}, sol.value.at(1, s, 0),
                            timing_cell(cfg, ms)});
    }
  }
  return table;
}

ResultTable run_vigu_cells(const ExperimentConfig& cfg, const std::vector<std::int64_t>& n_values) {
  const auto u = make_utility(cfg.utility, cfg.mdp.H);
  const Grid grid(*cfg.grid_m, cfg.mdp.H);
  const auto env = discretize(cfg.mdp, grid);
  const auto optimal = solve_optimal(env, u);
  const auto weights = start_weights(cfg);
  std::vector<double> reference;
  if (cfg.mc_trials > 0) {
    const Grid fine(grid.m() * cfg.fine_multiplier, cfg.mdp.H);
    const auto fine_opt = solve_optimal(discretize(cfg.mdp, fine), u);
    for (int s = 0; s < cfg.mdp.S; ++s) reference.push_back(fine_opt.value.at(1, s, 0));
  }

  ResultTable table;
  table.columns = {"config_hash", "n",        "seed",      "m",     "gap_discretized",
                   "gap_mc_mean", "gap_mc_ci", "iota1",     "wall_ms"};
  const std::size_t cells = cfg.seeds.size() * n_values.size();
  table.rows.resize(cells);
  parallel_for(cells, [&](std::size_t idx) {
    const auto seed = cfg.seeds[idx / n_values.size()];
    const auto n = n_values[idx % n_values.size()];
    const auto start = std::chrono::steady_clock::now();
    Simulator sim(cfg.mdp);
    const CounterRng rng(seed);
    const auto result = vigu(sim, u, grid, n, rng, cfg.p);
    const auto achieved = evaluate_policy(env, u, result.estimate.policy);
    double gap = 0.0;
    for (int s = 0; s < cfg.mdp.S; ++s) gap = std::max(gap, optimal.value.at(1, s, 0) - achieved.at(1, s, 0));
    CsvCell gap_mc, gap_ci;
    if (cfg.mc_trials > 0) {
      double mean = 0.0, var = 0.0;
      for (int s = 0; s < cfg.mdp.S; ++s) {
        if (weights[s] <= 0.0) continue;
        CounterRng mc_rng = rng.split(0x6d63, static_cast<std::uint64_t>(s));
        const auto est = mc_policy_value(cfg.mdp, u, result.policy, s, cfg.mc_trials, mc_rng);
        mean += weights[s] * (reference[s] - est.mean);
        var += weights[s] * weights[s] * est.ci_half_width * est.ci_half_width;
      }
      gap_mc = mean;
      gap_ci = std::sqrt(var);
    }
    table.rows[idx] = {cfg.hash,      n,     static_cast<std::int64_t>(seed), std::int64_t{grid.m()}, gap,
                       gap_mc,        gap_ci, result.iota1,                    timing_cell(cfg, elapsed_ms(start))};
  });
  return table;
}

UcbOptions ucb_options(const ExperimentConfig& cfg, std::int64_t episodes) {
  UcbOptions opt;
  opt.episodes = episodes;
  opt.p = cfg.p;
  opt.initial_distribution = cfg.initial_distribution;
  opt.mc_every = cfg.mc_trials > 0 ? cfg.mc_every : 0;
  opt.mc_trials = cfg.mc_trials;
  opt.fine_multiplier = cfg.fine_multiplier;
  return opt;
}

ResultTable run_ucb(const ExperimentConfig& cfg) {
  const auto u = make_utility(cfg.utility, cfg.mdp.H);
  const Grid grid(resolve_grid_m(cfg, cfg.episodes), cfg.mdp.H);
  ResultTable table;
  table.columns = {"config_hash", "seed",   "m",          "iota2",    "k",     "s1",     "v_opt",
                   "v_pik",       "regret_k", "cum_regret", "mc_value", "mc_ci", "wall_ms"};
  std::vector<std::vector<ResultRow>> per_seed(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), [&](std::size_t idx) {
    const auto seed = cfg.seeds[idx];
    auto options = ucb_options(cfg, cfg.episodes);
    std::vector<double> plan_times;
    const auto start = std::chrono::steady_clock::now();
    if (cfg.timing) options.on_plan = [&](std::int64_t, const QTable&) { plan_times.push_back(elapsed_ms(start)); };
    const auto trace = vigu_ucb(cfg.mdp, u, grid, options, seed);
    plan_times.push_back(elapsed_ms(start));
    auto& rows = per_seed[idx];
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
      const auto& r = trace.records[i];
      const CsvCell mc = std::isnan(r.mc_value) ? CsvCell{} : CsvCell{r.mc_value};
      const CsvCell ci = std::isnan(r.mc_ci) ? CsvCell{} : CsvCell{r.mc_ci};
      const CsvCell ms = cfg.timing ? CsvCell{plan_times[i + 1] - plan_times[i]} : CsvCell{};
      rows.push_back({cfg.hash, static_cast<std::int64_t>(seed), std::int64_t{grid.m()}, trace.iota2, r.k,
                      std::int64_t{r.s1}, r.v_opt, r.v_pik, r.regret, r.cum_regret, mc, ci, ms});
    }
  });
  for (auto& rows : per_seed) std::move(rows.begin(), rows.end(), std::back_inserter(table.rows));
  return table;
}

ResultTable run_ucb_sweep(const ExperimentConfig& cfg) {
  const auto u = make_utility(cfg.utility, cfg.mdp.H);
  ResultTable table;
  table.columns = {"config_hash",         "episodes",           "seed",   "m", "iota2", "cum_regret",
                   "mean_regret_first10", "mean_regret_last10", "wall_ms"};
  const auto& values = cfg.sweep_values;
  const std::size_t cells = cfg.seeds.size() * values.size();
  table.rows.resize(cells);
  parallel_for(cells, [&](std::size_t idx) {
    const auto seed = cfg.seeds[idx / values.size()];
    const auto episodes = values[idx % values.size()];
    const auto start = std::chrono::steady_clock::now();
    const Grid grid(resolve_grid_m(cfg, episodes), cfg.mdp.H);
    auto options = ucb_options(cfg, episodes);
    options.mc_every = 0;
    const auto trace = vigu_ucb(cfg.mdp, u, grid, options, seed);
    const auto tenth = std::max<std::size_t>(1, trace.records.size() / 10);
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < tenth; ++i) {
      first += trace.records[i].regret;
      last += trace.records[trace.records.size() - 1 - i].regret;
    }
    table.rows[idx] = {cfg.hash,
                       episodes,
                       static_cast<std::int64_t>(seed),
                       std::int64_t{grid.m()},
                       trace.iota2,
                       trace.records.back().cum_regret,
                       first / static_cast<double>(tenth),
                       last / static_cast<double>(tenth),
                       timing_cell(cfg, elapsed_ms(start))};
  });
  return table;
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& cfg) {
  try {
    switch (cfg.algorithm) {
      case Algorithm::kSolve: return run_solve(cfg);
      case Algorithm::kVigu: return run_vigu_cells(cfg, {cfg.n});
      case Algorithm::kUcb: return run_ucb(cfg);
      case Algorithm::kSweep:
        return cfg.sweep_algorithm == Algorithm::kVigu ? run_vigu_cells(cfg, cfg.sweep_values) : run_ucb_sweep(cfg);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error("experiment " + to_string(cfg.algorithm) + " (config " + cfg.hash + "): " + e.what());
  }
  return {};
}

void write_csv(const ResultTable& table, std::ostream& os) {
  write_csv_record(os, table.columns);
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw std::logic_error("CSV row does not match the header schema");
    write_csv_record(os, row);
  }
}

void write_csv(const ResultTable& table, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing: " + std::strerror(errno));
  write_csv(table, os);
  os.flush();
  if (!os) throw std::runtime_error("error while writing " + path + ": " + std::strerror(errno));
}

}  // namespace riskdp
