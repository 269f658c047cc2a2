#pragma once

#include "vhi/scalar_law.hpp"
#include "vhi/spaces.hpp"

#include <functional>
#include <memory>

namespace vhi {

class HistoryOperator;

/// The complete constant set attached to a problem instance. Lipschitz-type
/// constants are upper bounds (stored >= sampled estimate); the monotonicity
/// constant m_A is a lower bound (stored <= sampled estimate).
struct HypothesisConstants {
  double m_A = 0.0;      // strong monotonicity of A in v
  double mbar_A = 0.0;   // Lipschitz of A in the history slot
  double a0_max = 0.0;   // growth: |A(t,l,v)|_* <= a0 + a1|l|_E + a2|v|
  double a1 = 0.0;
  double a2 = 0.0;
  double L_f = 0.0;      // Lipschitz of f in the X slot
  double alpha_phi = 0.0;
  double beta_phi = 0.0;
  double c0j_max = 0.0;  // subgradient growth: |dj|_{X*} <= c0j + c1j|z|_Z + c2j|x|_X
  double c1j = 0.0;
  double c2j = 0.0;
  double m_j = 0.0;      // nonconvexity modulus of j
  double m_1 = 0.0;      // history sensitivity of j
  double c_R1 = 0.0;
  double c_R2 = 0.0;
  double c_R3 = 0.0;
  double c_R4 = 0.0;
  double M_norm = 0.0;   // certified estimate of |M|
};

/// m_A - m_j |M|^2 - alpha_phi; positive means the smallness condition holds.
double smallness_margin(const HypothesisConstants& h);

/// Convex potential phi(t, eta, w, v), convex in v. Exposed through value
/// differences and a proximal map taken in the lumped (nodal Euclidean)
/// metric; the prox absorbs the indicator of K, so its output is feasible.
struct ConvexPotential {
  // phi(t,eta,w,v1) - phi(t,eta,w,v2)
  std::function<double(double, const Vec&, const Vec&, const Vec&, const Vec&)> value_diff;
  // argmin_y 1/2|y-x|^2 + rho*phi(t,eta,w_frozen,y) + indicator_K(y)
  std::function<Vec(double, const Vec&, const Vec&, const Vec&, double)> prox;

  /// phi == 0: prox reduces to the constraint projection.
  static ConvexPotential zero(const ConstraintSet& k);
};

/// Locally Lipschitz potential j(t, zeta, x) on the boundary space X, exposed
/// through its generalized directional derivative and a measurable
/// subgradient selection. Selections are returned as Riesz representatives in
/// the weighted X metric, so |selection|_X is the X* norm.
struct LipschitzPotential {
  std::function<double(double, const Vec&, const Vec&, const Vec&)> dir_deriv;  // j0(t,z,x;d)
  std::function<Vec(double, const Vec&, const Vec&)> subgrad_select;

  static LipschitzPotential zero(Eigen::Index x_dim);
};

/// Prototype j(t, zeta, x) = alpha(t, zeta) * sum_i w_i g(x_i) with a scalar
/// law g and lumped weights w.
struct PrototypePotential {
  std::function<double(double, const Vec&)> alpha;  // values in [0, alpha0]
  double alpha0 = 0.0;
  ScalarLaw g = ScalarLaw::quadratic(1.0);
  Vec weights;  // lumped boundary weights on X

  double j0(double t, const Vec& zeta, const Vec& x, const Vec& d) const;
  Vec subgrad(double t, const Vec& zeta, const Vec& x) const;
  LipschitzPotential as_potential() const;
};

/// j0_prototype(t, zeta, x, d) = alpha(t,zeta) * sum_i w_i g0(x_i; d_i).
double j0_prototype(const PrototypePotential& p, double t, const Vec& zeta, const Vec& x,
                    const Vec& d);

struct RelaxedMonotonicityReport {
  double min_quotient = 0.0;  // min over pairs of <dg1-dg2, v1-v2>/|v1-v2|^2 + m_g
  double witness_v1 = 0.0;
  double witness_v2 = 0.0;
  bool pass = false;
};

/// Samples scalar pairs in [-radius, radius]^2 and reports the worst relaxed
/// monotonicity quotient of the prototype's g against the claimed constant.
RelaxedMonotonicityReport check_relaxed_monotonicity(const PrototypePotential& pot,
                                                     int sample_count, double radius,
                                                     double claimed_m_g, std::uint64_t seed = 0);

/// Dense pair scan variant on a fixed interval grid.
RelaxedMonotonicityReport scan_relaxed_monotonicity(const ScalarLaw& g, double lo, double hi,
                                                    int grid, double claimed_m_g);

/// The data bundle of the abstract problem: operators A and f, potentials phi
/// and j, the trace M, the constraint set K, the history operators R1..R4,
/// and the audited constant set. Dual vectors are residual representatives in
/// DoF coordinates, paired with the plain dot product.
struct AbstractProblem {
  std::string name;
  Eigen::Index dim = 0;
  std::shared_ptr<const EnergyMetric> metric;
  ConstraintSet constraint;
  std::shared_ptr<const TraceOperator> trace;  // M : V -> X

  WeightedSpace e_space{Vec()};
  WeightedSpace y_space{Vec()};
  WeightedSpace z_space{Vec()};

  // A(t, lambda, v) -> residual vector
  std::function<Vec(double, const Vec&, const Vec&)> A;
  // Optional partial application of A: folds the (t, lambda) slots once per
  // frozen solve so the inner loop pays only the v-dependent work.
  std::function<std::function<Vec(const Vec&)>(double, const Vec&)> A_bind;
  // f(t, xi) -> residual vector
  std::function<Vec(double, const Vec&)> f;
  ConvexPotential phi;
  LipschitzPotential j;

  // Slope bound of phi(t,eta,w,.) used by the a priori estimate:
  // (t, |eta|_Y, |z0|) -> c_phi1(t) + c_phi2(|z0|) + c3 |eta|_Y
  std::function<double(double, double, double)> phi_lip;

  std::shared_ptr<const HistoryOperator> r1, r2, r3, r4;

  HypothesisConstants constants;
  /// Characteristic magnitude for sampling audits and probe generation.
  double sample_scale = 1.0;

  const WeightedSpace& x_space() const { return trace->x_space(); }
  double margin() const { return smallness_margin(constants); }
};

}  // namespace vhi
