#pragma once

#include "vhi/spaces.hpp"

#include <functional>
#include <memory>

namespace vhi {

enum class QuadratureRule { LeftRectangle, Trapezoid };

/// Uniform grid t_n = n T / N on [0, T].
struct TimeGrid {
  double T = 1.0;
  int N = 1;

  TimeGrid() = default;
  TimeGrid(double horizon, int steps) : T(horizon), N(steps) {
    if (!(T > 0.0) || N < 1) throw Error("grid", "TimeGrid: need T > 0 and N >= 1");
  }
  double dt() const { return T / N; }
  double node(int n) const { return T * n / N; }
  int count() const { return N + 1; }
};

/// Quadrature weight of sample k in the approximation of the integral over
/// [0, t_n]. Left rectangle uses samples k < n only (strictly causal);
/// trapezoid uses k <= n.
double quad_weight(const TimeGrid& g, QuadratureRule rule, int n, int k);

/// One DoF sample per grid node.
struct Trajectory {
  TimeGrid grid;
  std::vector<Vec> samples;

  Trajectory() = default;
  Trajectory(const TimeGrid& g, Eigen::Index dim)
      : grid(g), samples(static_cast<std::size_t>(g.count()), Vec::Zero(dim)) {}

  Eigen::Index dim() const { return samples.empty() ? 0 : samples.front().size(); }
  const Vec& at(int n) const { return samples[static_cast<std::size_t>(n)]; }
  Vec& at(int n) { return samples[static_cast<std::size_t>(n)]; }
};

/// Discrete L^2(0, t_n; V) norm with the given rule (n = -1 means the full
/// horizon t_N).
double traj_l2_norm(const Trajectory& w, const EnergyMetric& metric, QuadratureRule rule,
                    int n = -1);
double traj_l2_distance(const Trajectory& a, const Trajectory& b, const EnergyMetric& metric,
                        QuadratureRule rule, int n = -1);

/// u0 + integral of w over [0, t_n] under the given rule.
Vec integrate_displacement(const Trajectory& w, int n, const Vec& u0, QuadratureRule rule);

/// Discrete history-dependent operator: the value at t_n depends on samples
/// with index < n (left rectangle) or <= n (trapezoid).
class HistoryOperator {
 public:
  HistoryOperator(std::string kind, QuadratureRule rule, WeightedSpace out)
      : kind_(std::move(kind)), rule_(rule), out_space_(std::move(out)) {}
  virtual ~HistoryOperator() = default;

  const std::string& kind() const { return kind_; }
  QuadratureRule rule() const { return rule_; }
  const WeightedSpace& out_space() const { return out_space_; }
  Eigen::Index out_dim() const { return out_space_.dim(); }

  Vec eval(const Trajectory& w, int n) const;
  /// All nodes in one pass (prefix sums where the kind allows it).
  virtual std::vector<Vec> eval_all(const Trajectory& w) const;

 protected:
  virtual Vec eval_impl(const Trajectory& w, int n) const = 0;

 private:
  std::string kind_;
  QuadratureRule rule_;
  WeightedSpace out_space_;
};

using HistoryPtr = std::shared_ptr<const HistoryOperator>;

/// out(t_n) = 0.
HistoryPtr zero_history(Eigen::Index out_dim, QuadratureRule rule = QuadratureRule::LeftRectangle);

/// out(t_n) = L (u0 + integral_0^{t_n} w).
HistoryPtr integral_map_history(Mat L, Vec u0, WeightedSpace out, QuadratureRule rule);

/// out(t_n) = sum_k q_k kappa(t_n - t_k) L w_k (discrete convolution).
HistoryPtr convolution_history(Mat L, std::function<double(double)> kappa, WeightedSpace out,
                               QuadratureRule rule);

/// out_i(t_n) = integral_0^{t_n} |(P (u0 + integral_0^s w))_i| ds
/// (accumulated slip; same rule at both quadrature levels).
HistoryPtr accumulated_norm_history(Mat P, Vec u0, WeightedSpace out, QuadratureRule rule);

HistoryPtr sum_history(HistoryPtr a, HistoryPtr b);
HistoryPtr stack_history(HistoryPtr a, HistoryPtr b);

struct HistoryLipschitzReport {
  double max_quotient = 0.0;
  bool pass = false;
  int skipped_nodes = 0;  // zero-denominator nodes
  int worst_node = -1;
  int worst_pair = -1;
};

/// For each trajectory pair and node n: |(Rv1)(t_n)-(Rv2)(t_n)| divided by the
/// quadrature of |v1-v2|_V over [0,t_n]; pass iff max <= claimed * (1+1e-6).
HistoryLipschitzReport audit_history_lipschitz(
    const HistoryOperator& op, const EnergyMetric& metric,
    const std::vector<std::pair<Trajectory, Trajectory>>& pairs, double claimed_c_R);

}  // namespace vhi
