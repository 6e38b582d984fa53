#pragma once

#include <string>
#include <utility>
#include <vector>

namespace riskdp {

enum class UtilityKind { kLinear, kExponential, kCrra, kPiecewiseLinear };

std::string to_string(UtilityKind kind);

/// Parameters of a utility family. Only the fields of `kind` are read.
struct UtilitySpec {
  UtilityKind kind = UtilityKind::kLinear;
  double slope = 1.0;   // linear
  double beta = 1.0;    // exponential: U(y) = (1 - exp(-beta y)) / beta
  double gamma = 0.5;   // crra, in (0, 1)
  double shift = 0.05;  // crra shift c, keeps U'(0) finite
  std::vector<std::pair<double, double>> knots;  // piecewise_linear (y, U(y))

  static UtilitySpec linear(double slope = 1.0);
  static UtilitySpec exponential(double beta);
  static UtilitySpec crra(double gamma, double shift = 0.05);
  static UtilitySpec piecewise_linear(std::vector<std::pair<double, double>> knots);
};

/// Utility U on [0, H] with U(0) = 0, strictly increasing, kappa-Lipschitz.
/// Immutable after construction.
class UtilityFn {
 public:
  double operator()(double y) const;

  double kappa() const { return kappa_; }
  double horizon_cap() const { return horizon_cap_; }
  UtilityKind kind() const { return spec_.kind; }
  const UtilitySpec& spec() const { return spec_; }

  /// True when U is convex on [0, H] (risk-seeking or risk-neutral).
  bool is_convex() const;
  /// True when U is concave on [0, H] (risk-averse or risk-neutral).
  bool is_concave() const;

 private:
  friend UtilityFn make_utility(const UtilitySpec& spec, int horizon);

  UtilitySpec spec_;
  double horizon_cap_ = 0.0;
  double kappa_ = 0.0;
};

/// Validates `spec` and builds the utility on [0, horizon].
/// Throws std::invalid_argument on out-of-range parameters.
UtilityFn make_utility(const UtilitySpec& spec, int horizon);

/// U(y). Values within 1e-9 outside [0, H] are clamped; anything further out
/// throws std::out_of_range.
double eval_utility(const UtilityFn& u, double y);

/// Exact sup of |U'| on [0, horizon], computed in closed form per family.
double lipschitz_coeff(const UtilityFn& u, int horizon);

}  // namespace riskdp
