#include "riskdp/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace riskdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRowTol = 1e-12;
constexpr double kMassTol = 1e-9;

std::string cell_name(int h, int s, int a) {
  std::ostringstream os;
  os << "(h=" << h << ",s=" << s << ",a=" << a << ")";
  return os.str();
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

RewardDist RewardDist::uniform(double lo, double hi) {
  RewardDist d;
  d.family_ = Uniform{lo, hi};
  return d;
}

RewardDist RewardDist::piecewise_linear(std::vector<std::pair<double, double>> knots) {
  PiecewiseDensity p;
  for (const auto& [r, f] : knots) {
    p.r.push_back(r);
    p.f.push_back(f);
  }
  RewardDist d;
  d.cum_.assign(p.r.size(), 0.0);
  for (std::size_t i = 1; i < p.r.size(); ++i) {
    d.cum_[i] = d.cum_[i - 1] + 0.5 * (p.r[i] - p.r[i - 1]) * (p.f[i] + p.f[i - 1]);
  }
  d.family_ = std::move(p);
  return d;
}

RewardDist RewardDist::triangular(double lo, double peak, double hi) {
  const double height = 2.0 / (hi - lo);
  return piecewise_linear({{lo, 0.0}, {peak, height}, {hi, 0.0}});
}

RewardDist RewardDist::point_mass(double r0) {
  RewardDist d;
  d.family_ = PointMass{r0};
  return d;
}

double RewardDist::cdf(double x) const {
  return std::visit(
      overloaded{
          [&](const Uniform& u) { return std::clamp((x - u.lo) / (u.hi - u.lo), 0.0, 1.0); },
          [&](const PointMass& p) { return x >= p.r0 ? 1.0 : 0.0; },
          [&](const PiecewiseDensity& p) {
            if (p.r.empty() || x <= p.r.front()) return 0.0;
            if (x >= p.r.back()) return cum_.back();
            const auto it = std::upper_bound(p.r.begin(), p.r.end(), x);
            const auto i = static_cast<std::size_t>(it - p.r.begin()) - 1;
            const double width = p.r[i + 1] - p.r[i];
            const double t = x - p.r[i];
            const double slope = (p.f[i + 1] - p.f[i]) / width;
            return cum_[i] + p.f[i] * t + 0.5 * slope * t * t;
          },
      },
      family_);
}

double RewardDist::mass(double lo, double hi) const {
  if (lo > hi) {
    std::ostringstream msg;
    msg << "reward_mass interval is reversed: lo=" << lo << " > hi=" << hi;
    throw std::invalid_argument(msg.str());
  }
  return cdf(hi) - cdf(lo);
}

double RewardDist::quantile(double u) const {
  return std::visit(
      overloaded{
          [&](const Uniform& d) { return d.lo + u * (d.hi - d.lo); },
          [&](const PointMass& d) { return d.r0; },
          [&](const PiecewiseDensity& d) {
            const double target = u * cum_.back();
            auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
            if (it == cum_.end()) return d.r.back();
            const auto i = static_cast<std::size_t>(it - cum_.begin()) - 1;
            const double width = d.r[i + 1] - d.r[i];
            const double local = target - cum_[i];
            const double slope = (d.f[i + 1] - d.f[i]) / width;
            // Solve f_i t + slope t^2 / 2 = local in the cancellation-free form.
            const double denom = d.f[i] + std::sqrt(std::max(0.0, d.f[i] * d.f[i] + 2.0 * slope * local));
            const double t = denom > 0.0 ? 2.0 * local / denom : 0.0;
            return d.r[i] + std::clamp(t, 0.0, width);
          },
      },
      family_);
}

double RewardDist::mean() const {
  return std::visit(overloaded{
                        [](const Uniform& d) { return 0.5 * (d.lo + d.hi); },
                        [](const PointMass& d) { return d.r0; },
                        [](const PiecewiseDensity& d) {
                          double m = 0.0;
                          for (std::size_t i = 0; i + 1 < d.r.size(); ++i) {
                            const double a = d.r[i], b = d.r[i + 1];
                            m += (b - a) * (d.f[i] * (2 * a + b) + d.f[i + 1] * (a + 2 * b)) / 6.0;
                          }
                          return m;
                        },
                    },
                    family_);
}

double RewardDist::lambda() const {
  return std::visit(overloaded{
                        [](const Uniform& d) { return (d.lo <= 0.0 && d.hi >= 1.0) ? 0.0 : kInf; },
                        [](const PointMass&) { return kInf; },
                        [](const PiecewiseDensity& d) {
                          if (d.r.empty()) return kInf;
                          if ((d.r.front() > 0.0 && d.f.front() > 0.0) || (d.r.back() < 1.0 && d.f.back() > 0.0)) {
                            return kInf;
                          }
                          double l = 0.0;
                          for (std::size_t i = 0; i + 1 < d.r.size(); ++i) {
                            l = std::max(l, std::abs(d.f[i + 1] - d.f[i]) / (d.r[i + 1] - d.r[i]));
                          }
                          return l;
                        },
                    },
                    family_);
}

double RewardDist::eta() const {
  return std::visit(overloaded{
                        [](const Uniform& d) { return 1.0 / (d.hi - d.lo); },
                        [](const PointMass&) { return kInf; },
                        [](const PiecewiseDensity& d) {
                          return d.f.empty() ? kInf : *std::max_element(d.f.begin(), d.f.end());
                        },
                    },
                    family_);
}

std::vector<std::string> RewardDist::violations() const {
  std::vector<std::string> out;
  std::visit(overloaded{
                 [&](const Uniform& d) {
                   if (!(d.lo < d.hi)) out.push_back("uniform reward needs lo < hi");
                   if (d.lo < 0.0 || d.hi > 1.0) out.push_back("uniform reward support leaves [0,1]");
                 },
                 [&](const PointMass& d) {
                   if (!(d.r0 >= 0.0 && d.r0 <= 1.0)) out.push_back("point-mass reward outside [0,1]");
                 },
                 [&](const PiecewiseDensity& d) {
                   if (d.r.size() < 2 || d.r.size() != d.f.size()) {
                     out.push_back("piecewise density needs at least two (r, f) knots");
                     return;
                   }
                   for (std::size_t i = 0; i < d.r.size(); ++i) {
                     std::ostringstream os;
                     if (d.r[i] < 0.0 || d.r[i] > 1.0) {
                       os << "density knot " << i << " at r=" << d.r[i] << " lies outside [0,1]";
                       out.push_back(os.str());
                     } else if (d.f[i] < 0.0) {
                       os << "density knot " << i << " (r=" << d.r[i] << ") is negative: f=" << d.f[i];
                       out.push_back(os.str());
                     }
                     if (i > 0 && !(d.r[i] > d.r[i - 1])) {
                       std::ostringstream o2;
                       o2 << "density knot " << i << " is not strictly after knot " << i - 1;
                       out.push_back(o2.str());
                     }
                   }
                   if (std::abs(cum_.back() - 1.0) > kMassTol) {
                     std::ostringstream os;
                     os << "density integrates to " << cum_.back() << " instead of 1";
                     out.push_back(os.str());
                   }
                 },
             },
             family_);
  return out;
}

double reward_mass(const RewardDist& dist, double lo, double hi) { return dist.mass(lo, hi); }

TabularRSMDP::TabularRSMDP(int states, int actions, int horizon)
    : S(states), A(actions), H(horizon) {
  if (states < 1 || actions < 1 || horizon < 1) {
    throw std::invalid_argument("MDP needs S, A, H >= 1");
  }
  const auto cells = static_cast<std::size_t>(H) * S * A;
  trans.assign(cells * S, 0.0);
  rewards.assign(cells, RewardDist::uniform());
}

double TabularRSMDP::lambda_max() const {
  double l = 0.0;
  for (const auto& r : rewards) l = std::max(l, r.lambda());
  return l;
}

double TabularRSMDP::eta_max() const {
  double e = 0.0;
  for (const auto& r : rewards) e = std::max(e, r.eta());
  return e;
}

bool TabularRSMDP::test_mode() const {
  return std::any_of(rewards.begin(), rewards.end(), [](const auto& r) { return r.is_point_mass(); });
}

std::vector<std::string> validate_mdp(const TabularRSMDP& mdp) {
  std::vector<std::string> out;
  if (mdp.S < 1 || mdp.A < 1 || mdp.H < 1) {
    out.push_back("S, A and H must all be >= 1");
    return out;
  }
  const auto cells = static_cast<std::size_t>(mdp.H) * mdp.S * mdp.A;
  if (mdp.trans.size() != cells * mdp.S) {
    out.push_back("transition table has wrong size");
    return out;
  }
  if (mdp.rewards.size() != cells) {
    out.push_back("reward table has wrong size");
    return out;
  }
  for (int h = 1; h <= mdp.H; ++h) {
    for (int s = 0; s < mdp.S; ++s) {
      for (int a = 0; a < mdp.A; ++a) {
        const auto row = mdp.row(h, s, a);
        double sum = 0.0;
        for (int sp = 0; sp < mdp.S; ++sp) {
          if (!(row[sp] >= 0.0)) {
            std::ostringstream os;
            os << "transition row " << cell_name(h, s, a) << " has negative entry " << row[sp] << " at s'=" << sp;
            out.push_back(os.str());
          }
          sum += row[sp];
        }
        if (!(std::abs(sum - 1.0) <= kRowTol)) {
          std::ostringstream os;
          os << "transition row " << cell_name(h, s, a) << " sums to " << sum;
          out.push_back(os.str());
        }
        for (const auto& v : mdp.reward(h, s, a).violations()) {
          out.push_back("reward " + cell_name(h, s, a) + ": " + v);
        }
      }
    }
  }
  return out;
}

StepSample sample_step(const TabularRSMDP& mdp, int s, int a, int h, CounterRng& rng) {
  if (s < 0 || s >= mdp.S || a < 0 || a >= mdp.A || h < 1 || h > mdp.H) {
    std::ostringstream msg;
    msg << "sample_step index out of range: " << cell_name(h, s, a) << " for S=" << mdp.S << ", A=" << mdp.A
        << ", H=" << mdp.H;
    throw std::out_of_range(msg.str());
  }
  const double u_state = rng.uniform();
  const double u_reward = rng.uniform();
  const auto row = mdp.row(h, s, a);
  int next = -1;
  double acc = 0.0;
  for (int sp = 0; sp < mdp.S; ++sp) {
    if (row[sp] <= 0.0) continue;
    acc += row[sp];
    next = sp;
    if (u_state < acc) break;
  }
  if (next < 0) throw std::logic_error("transition row " + cell_name(h, s, a) + " has no mass");
  const double r = std::clamp(mdp.reward(h, s, a).quantile(u_reward), 0.0, 1.0);
  return {next, r};
}

namespace {

TabularRSMDP make_chain(const GeneratorSpec& spec) {
  if (spec.length < 2) throw std::invalid_argument("chain length must be >= 2");
  const int L = spec.length;
  TabularRSMDP mdp(L, 2, spec.horizon);
  for (int h = 1; h <= mdp.H; ++h) {
    for (int s = 0; s < L; ++s) {
      // Action 0 holds position with a concentrated reward around 0.5.
      auto stay = mdp.row(h, s, 0);
      stay[s] += 0.9;
      stay[std::max(s - 1, 0)] += 0.1;
      mdp.reward(h, s, 0) = RewardDist::triangular(0.3, 0.5, 0.7);
      // Action 1 advances; its wide reward grows along the chain.
      auto advance = mdp.row(h, s, 1);
      advance[std::min(s + 1, L - 1)] += 0.7;
      advance[s] += 0.3;
      const double centre = 0.25 + 0.5 * static_cast<double>(s) / (L - 1);
      mdp.reward(h, s, 1) = RewardDist::triangular(centre - 0.25, centre, centre + 0.25);
    }
  }
  return mdp;
}

TabularRSMDP make_random(const GeneratorSpec& spec) {
  if (spec.states < 1 || spec.actions < 1) throw std::invalid_argument("random MDP needs states, actions >= 1");
  if (spec.grid_rewards && spec.grid_m < 1) throw std::invalid_argument("grid_m must be >= 1");
  TabularRSMDP mdp(spec.states, spec.actions, spec.horizon);
  CounterRng rng(spec.seed);
  for (int h = 1; h <= mdp.H; ++h) {
    for (int s = 0; s < mdp.S; ++s) {
      for (int a = 0; a < mdp.A; ++a) {
        // Dirichlet(1, ..., 1) row from normalized exponentials.
        auto row = mdp.row(h, s, a);
        double total = 0.0;
        for (auto& p : row) {
          p = -std::log1p(-rng.uniform()) + 1e-12;
          total += p;
        }
        for (auto& p : row) p /= total;
        if (spec.grid_rewards) {
          const auto idx = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(spec.grid_m + 1));
          mdp.reward(h, s, a) = RewardDist::point_mass(static_cast<double>(idx) / spec.grid_m);
        } else {
          std::vector<std::pair<double, double>> knots;
          for (int i = 0; i <= 3; ++i) knots.emplace_back(i / 3.0, 0.1 + 0.9 * rng.uniform());
          double area = 0.0;
          for (int i = 0; i < 3; ++i) area += 0.5 * (knots[i + 1].first - knots[i].first) * (knots[i].second + knots[i + 1].second);
          for (auto& k : knots) k.second /= area;
          mdp.reward(h, s, a) = RewardDist::piecewise_linear(std::move(knots));
        }
      }
    }
  }
  return mdp;
}

TabularRSMDP make_safe_risky_bandit(const GeneratorSpec& spec) {
  TabularRSMDP mdp(1, 2, spec.horizon);
  for (int h = 1; h <= mdp.H; ++h) {
    mdp.row(h, 0, 0)[0] = 1.0;
    mdp.row(h, 0, 1)[0] = 1.0;
    mdp.reward(h, 0, 0) = RewardDist::triangular(0.25, 0.5, 0.75);
    mdp.reward(h, 0, 1) = RewardDist::uniform(0.0, 1.0);
  }
  return mdp;
}

}  // namespace

TabularRSMDP gen_mdp(const GeneratorSpec& spec) {
  if (spec.horizon < 1) throw std::invalid_argument("generator horizon must be >= 1");
  TabularRSMDP mdp;
  switch (spec.kind) {
    case GeneratorKind::kChain: mdp = make_chain(spec); break;
    case GeneratorKind::kRandom: mdp = make_random(spec); break;
    case GeneratorKind::kSafeRiskyBandit: mdp = make_safe_risky_bandit(spec); break;
  }
  if (const auto v = validate_mdp(mdp); !v.empty()) {
    throw std::logic_error("generated MDP failed validation: " + v.front());
  }
  return mdp;
}

}  // namespace riskdp
