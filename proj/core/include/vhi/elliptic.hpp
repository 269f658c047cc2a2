#pragma once

#include "vhi/problem.hpp"

namespace vhi {

/// Frozen history/time data (t, lambda, xi, eta, zeta) of the auxiliary
/// problem.
struct FrozenData {
  double t = 0.0;
  Vec lambda;  // E-state
  Vec xi;      // X-state
  Vec eta;     // Y-state
  Vec zeta;    // Z-state

  static FrozenData zero(const AbstractProblem& p, double t = 0.0);
};

struct SolveConfig {
  double rho = 0.0;  // forward-backward step; 0 = auto from a sampled Lipschitz estimate
  double inner_tol = 1e-10;
  double outer_tol = 1e-10;
  int max_inner = 200000;  // total budget across outer sweeps
  int max_outer = 200;
  double divergence_factor = 10.0;
};

struct FrozenResult {
  Vec w;
  double residual = 0.0;  // self-consistent fixed-point residual (lumped norm)
  int inner_iterations = 0;
  int outer_iterations = 0;
  double rho_used = 0.0;
  std::vector<double> outer_history;  // successive outer differences (V-norm)
};

/// Solves the frozen-data inequality: find w in K with
///   <A(t,l,w) - f(t,xi) + M* z, v - w> + phi(t,eta,w,v) - phi(t,eta,w,w) >= 0
/// for all v in K, z a subgradient selection of j at Mw. Outer successive
/// linearization (freeze z and phi's quasi slot) around an inner proximal
/// gradient loop in the lumped metric. Refuses when the smallness margin is
/// not positive. `warm` optionally seeds the iteration.
FrozenResult solve_frozen(const AbstractProblem& p, const FrozenData& d, const SolveConfig& cfg,
                          const Vec* warm = nullptr);

struct MintyReport {
  double min_value = 0.0;
  int worst_probe = -1;
  Vec worst_probe_vec;
};

/// min over probes v of
///   <A(t,l,v) - f(t,xi), v - w> + phi(t,eta,w,v) - phi(t,eta,w,w)
///   + j0(t,zeta, Mv; Mv - Mw).
/// A solution certifies min >= -tol; infeasible probes are an error.
MintyReport minty_residual(const AbstractProblem& p, const FrozenData& d, const Vec& w,
                           const std::vector<Vec>& probes);

/// Probe cloud for the Minty certificate: projected Gaussian perturbations of
/// w at three radii relative to (1 + |w|_V), plus constraint-active corners.
std::vector<Vec> make_minty_probes(const AbstractProblem& p, const Vec& w, int count,
                                   std::uint64_t seed);

struct AprioriReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// Checks (m_A - m_j|M|^2 - alpha_phi) |w - v0| against the explicit growth
/// bound assembled from the stored constants, anchored at v0 in K, z0 in V,
/// xi0 in X.
AprioriReport apriori_bound_check(const AbstractProblem& p, const FrozenData& d, const Vec& w,
                                  const Vec& v0, const Vec& z0, const Vec& xi0);

}  // namespace vhi
