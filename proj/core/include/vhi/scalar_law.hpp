#pragma once

#include "vhi/types.hpp"

#include <limits>

namespace vhi {

/// Scalar locally Lipschitz potential g with piecewise-linear derivative.
/// The derivative beta is stored as breakpoints with left/right limits, so
/// kinks of g (derivative jumps) are representable. Outside the breakpoint
/// range beta extends as a constant.
///
/// For this class the Clarke subdifferential at x is conv{beta-(x), beta+(x)}
/// and the generalized directional derivative is
///   g0(x; d) = max(d * beta-(x), d * beta+(x)).
class ScalarLaw {
 public:
  struct Node {
    double x;
    double left;   // beta(x-)
    double right;  // beta(x+)
  };

  /// Nodes must be strictly increasing in x. g is anchored by g(0) = 0.
  explicit ScalarLaw(std::vector<Node> nodes);

  double value(double x) const;        // g(x)
  double deriv_left(double x) const;   // beta(x-)
  double deriv_right(double x) const;  // beta(x+)
  /// Measurable selection of the subdifferential: the right limit at kinks.
  double select(double x) const { return deriv_right(x); }
  /// Clarke directional derivative g0(x; d).
  double dir_deriv(double x, double d) const;

  /// sup |beta| (attained at breakpoints or tails since beta is piecewise linear).
  double deriv_bound() const;
  /// Smallest relaxed-monotonicity constant: m_g = max(0, -inf slope of beta).
  /// Infinite when beta jumps downward at some breakpoint.
  double relaxed_monotonicity_constant() const;

  const std::vector<Node>& nodes() const { return nodes_; }

  /// Continuous derivative through the given (x, beta) samples (no jumps).
  static ScalarLaw from_continuous_derivative(const std::vector<std::pair<double, double>>& pts);

  /// g(r) = c * r^2 / 2 (derivative c*r), sampled on [-R, R].
  static ScalarLaw quadratic(double c, double range = 100.0);
  /// g(r) = |r| (derivative jumps -1 -> +1 at 0).
  static ScalarLaw abs();

 private:
  std::vector<Node> nodes_;
  std::vector<double> cumint_;  // integral of beta from nodes_[0].x to nodes_[i].x

  double integral_from_first(double x) const;
};

/// The default normal-velocity potential of the contact model: beta(r) = 0 for
/// r <= 0, 2r on [0,1], 3-r on [1,2], 1 for r >= 2. Continuous derivative, so
/// the law is C^1 with deriv_bound 2 and relaxed-monotonicity constant 1.
ScalarLaw default_normal_damper_law();

}  // namespace vhi
