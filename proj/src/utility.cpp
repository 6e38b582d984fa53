#include "riskdp/utility.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace riskdp {

namespace {

constexpr double kDomainSlack = 1e-9;

double piecewise_eval(const std::vector<std::pair<double, double>>& knots, double y) {
  auto it = std::upper_bound(knots.begin(), knots.end(), y,
                             [](double v, const auto& knot) { return v < knot.first; });
  if (it == knots.begin()) return knots.front().second;
  if (it == knots.end()) return knots.back().second;
  const auto& [y0, u0] = *(it - 1);
  const auto& [y1, u1] = *it;
  return u0 + (u1 - u0) * (y - y0) / (y1 - y0);
}

std::vector<double> segment_slopes(const std::vector<std::pair<double, double>>& knots) {
  std::vector<double> slopes;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    slopes.push_back((knots[i].second - knots[i - 1].second) / (knots[i].first - knots[i - 1].first));
  }
  return slopes;
}

}  // namespace

std::string to_string(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::kLinear: return "linear";
    case UtilityKind::kExponential: return "exponential";
    case UtilityKind::kCrra: return "crra";
    case UtilityKind::kPiecewiseLinear: return "piecewise_linear";
  }
  return "unknown";
}

UtilitySpec UtilitySpec::linear(double slope) {
  UtilitySpec s;
  s.kind = UtilityKind::kLinear;
  s.slope = slope;
  return s;
}

UtilitySpec UtilitySpec::exponential(double beta) {
  UtilitySpec s;
  s.kind = UtilityKind::kExponential;
  s.beta = beta;
  return s;
}

UtilitySpec UtilitySpec::crra(double gamma, double shift) {
  UtilitySpec s;
  s.kind = UtilityKind::kCrra;
  s.gamma = gamma;
  s.shift = shift;
  return s;
}

UtilitySpec UtilitySpec::piecewise_linear(std::vector<std::pair<double, double>> knots) {
  UtilitySpec s;
  s.kind = UtilityKind::kPiecewiseLinear;
  s.knots = std::move(knots);
  return s;
}

double UtilityFn::operator()(double y) const {
  if (!(y >= -kDomainSlack && y <= horizon_cap_ + kDomainSlack)) {
    std::ostringstream msg;
    msg << "utility argument y=" << y << " outside domain [0, " << horizon_cap_ << "]";
    throw std::out_of_range(msg.str());
  }
  y = std::clamp(y, 0.0, horizon_cap_);
  switch (spec_.kind) {
    case UtilityKind::kLinear:
      return spec_.slope * y;
    case UtilityKind::kExponential:
      return -std::expm1(-spec_.beta * y) / spec_.beta;
    case UtilityKind::kCrra: {
      const double e = 1.0 - spec_.gamma;
      return (std::pow(y + spec_.shift, e) - std::pow(spec_.shift, e)) / e;
    }
    case UtilityKind::kPiecewiseLinear:
      return piecewise_eval(spec_.knots, y);
  }
  return 0.0;
}

bool UtilityFn::is_convex() const {
  switch (spec_.kind) {
    case UtilityKind::kLinear: return true;
    case UtilityKind::kExponential: return spec_.beta < 0.0;
    case UtilityKind::kCrra: return false;
    case UtilityKind::kPiecewiseLinear: {
      const auto slopes = segment_slopes(spec_.knots);
      return std::is_sorted(slopes.begin(), slopes.end());
    }
  }
  return false;
}

bool UtilityFn::is_concave() const {
  switch (spec_.kind) {
    case UtilityKind::kLinear: return true;
    case UtilityKind::kExponential: return spec_.beta > 0.0;
    case UtilityKind::kCrra: return true;
    case UtilityKind::kPiecewiseLinear: {
      const auto slopes = segment_slopes(spec_.knots);
      return std::is_sorted(slopes.begin(), slopes.end(), std::greater<>());
    }
  }
  return false;
}

UtilityFn make_utility(const UtilitySpec& spec, int horizon) {
  if (horizon < 1) throw std::invalid_argument("utility horizon must be >= 1");
  switch (spec.kind) {
    case UtilityKind::kLinear:
      if (!(spec.slope > 0.0) || !std::isfinite(spec.slope)) {
        throw std::invalid_argument("linear utility needs a positive finite slope");
      }
      break;
    case UtilityKind::kExponential:
      if (spec.beta == 0.0) {
        throw std::invalid_argument("exponential utility with beta = 0 is linear; use kind linear");
      }
      if (!std::isfinite(spec.beta)) throw std::invalid_argument("exponential beta must be finite");
      break;
    case UtilityKind::kCrra:
      if (!(spec.gamma > 0.0 && spec.gamma < 1.0)) {
        throw std::invalid_argument("crra gamma must lie in (0, 1)");
      }
      if (!(spec.shift > 0.0) || !std::isfinite(spec.shift)) {
        throw std::invalid_argument("crra shift must be positive");
      }
      break;
    case UtilityKind::kPiecewiseLinear: {
      const auto& k = spec.knots;
      if (k.size() < 2) throw std::invalid_argument("piecewise_linear utility needs at least two knots");
      if (k.front().first != 0.0 || k.front().second != 0.0) {
        throw std::invalid_argument("piecewise_linear utility must start at knot (0, 0)");
      }
      for (std::size_t i = 1; i < k.size(); ++i) {
        if (!(k[i].first > k[i - 1].first) || !(k[i].second > k[i - 1].second)) {
          std::ostringstream msg;
          msg << "piecewise_linear knots must be strictly increasing in both coordinates (knot " << i << ")";
          throw std::invalid_argument(msg.str());
        }
      }
      if (k.back().first < horizon) {
        std::ostringstream msg;
        msg << "piecewise_linear knots end at y=" << k.back().first << " but must cover [0, " << horizon << "]";
        throw std::invalid_argument(msg.str());
      }
      break;
    }
  }
  UtilityFn u;
  u.spec_ = spec;
  u.horizon_cap_ = static_cast<double>(horizon);
  u.kappa_ = lipschitz_coeff(u, horizon);
  return u;
}

double eval_utility(const UtilityFn& u, double y) { return u(y); }

double lipschitz_coeff(const UtilityFn& u, int horizon) {
  const auto& spec = u.spec();
  const double h = static_cast<double>(horizon);
  switch (spec.kind) {
    case UtilityKind::kLinear:
      return spec.slope;
    case UtilityKind::kExponential:
      // U'(y) = exp(-beta y): decreasing for beta > 0, increasing for beta < 0.
      return spec.beta > 0.0 ? 1.0 : std::exp(-spec.beta * h);
    case UtilityKind::kCrra:
      // U'(y) = (y + c)^(-gamma), maximal at y = 0.
      return std::pow(spec.shift, -spec.gamma);
    case UtilityKind::kPiecewiseLinear: {
      double best = 0.0;
      const auto& k = spec.knots;
      for (std::size_t i = 1; i < k.size(); ++i) {
        if (k[i - 1].first >= h) break;
        best = std::max(best, (k[i].second - k[i - 1].second) / (k[i].first - k[i - 1].first));
      }
      return best;
    }
  }
  return 0.0;
}

}  // namespace riskdp
