#pragma once

#include "vhi/elliptic.hpp"
#include "vhi/history.hpp"

namespace vhi {

struct EvolutionConfig {
  TimeGrid grid;
  SolveConfig frozen;
  double picard_tol = 1e-8;
  int max_picard = 100;
  QuadratureRule rule = QuadratureRule::LeftRectangle;
  int trapezoid_max_sweeps = 50;  // per-node fixed point under the implicit rule
};

struct NodeStats {
  int inner = 0;
  int outer = 0;
  double residual = 0.0;
};

struct EvolutionReport {
  Trajectory trajectory;
  std::vector<NodeStats> node_stats;
  std::vector<double> picard_residuals;  // trajectory L2 differences per sweep
  std::vector<double> state_residuals;   // Lambda-image L2 differences per sweep
  int sweeps = 0;
  bool converged = false;

  /// Successive ratios of picard_residuals.
  std::vector<double> contraction_ratios() const;
};

/// Frozen states at one node, evaluated from the history operators.
FrozenData frozen_states(const AbstractProblem& p, const Trajectory& w, int n);

/// Causal time-marching: for n = 0..N evaluate the history states from the
/// trajectory so far and solve the frozen problem at t_n. With the trapezoid
/// rule each node runs a small fixed point to resolve its own-sample coupling.
EvolutionReport time_march(const AbstractProblem& p, const EvolutionConfig& cfg);

/// Global Picard iteration on the history fixed-point map: freeze the states
/// along the whole trajectory, re-solve every node, repeat until the
/// successive L2(0,T) difference drops below picard_tol.
EvolutionReport picard_global(const AbstractProblem& p, const EvolutionConfig& cfg,
                              const Trajectory& init);

struct StatePerturbation {
  std::vector<Vec> dlambda, dxi, deta, dzeta;  // one entry per grid node

  static StatePerturbation zero(const AbstractProblem& p, const TimeGrid& grid);
  static StatePerturbation random(const AbstractProblem& p, const TimeGrid& grid, double scale,
                                  std::uint64_t seed);
  StatePerturbation scaled(double s) const;
  bool is_zero() const;
};

struct StabilityReport {
  double lhs = 0.0;    // |w1 - w2|_{L2(0,T;V)}
  double rhs = 0.0;    // assembled constant bound at T
  double max_ratio = 0.0;  // max over grid nodes of lhs(t)/rhs(t)
  bool pass = false;
  bool skipped = false;  // zero perturbation
};

/// Solves the per-node frozen problems along base states (from the time-march
/// solution of p) and along the perturbed states, then checks the cumulative
/// stability bound
///   |w1-w2|_{L2(0,t)} <= (mbar_A |dl| + L_f |dxi| + beta_phi |deta|
///                         + m_1 |M| |dzeta|)_{L2(0,t)} / margin
/// at every grid node.
StabilityReport stability_ratio(const AbstractProblem& p, const EvolutionConfig& cfg,
                                const StatePerturbation& perturb);

struct UniquenessReport {
  double max_distance = 0.0;
  std::vector<EvolutionReport> runs;
};

/// Runs picard_global from every init and reports the max pairwise distance.
UniquenessReport uniqueness_probe(const AbstractProblem& p, const EvolutionConfig& cfg,
                                  const std::vector<Trajectory>& inits);

}  // namespace vhi
