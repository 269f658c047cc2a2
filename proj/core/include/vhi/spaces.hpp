#pragma once

#include "vhi/types.hpp"

#include <optional>

namespace vhi {

/// Discrete inner product on the DoF space. `gram` must be symmetric positive
/// definite; the constructor factorizes it once and keeps the factor for dual
/// norms.
class EnergyMetric {
 public:
  explicit EnergyMetric(Mat gram);

  Eigen::Index dim() const { return gram_.rows(); }
  const Mat& gram() const { return gram_; }

  double inner(const Vec& u, const Vec& v) const;
  double norm(const Vec& u) const;
  /// Norm of a dual vector r (residual representative): sqrt(r^T G^-1 r).
  double dual_norm(const Vec& r) const;
  Vec solve(const Vec& r) const;  // G^-1 r

  static EnergyMetric identity(Eigen::Index n);

 private:
  Mat gram_;
  Eigen::LLT<Mat> llt_;
};

/// sqrt(u^T G u); errors on dimension mismatch.
double v_norm(const Vec& u, const EnergyMetric& m);

/// Diagonal-metric space for boundary/history states (E, X, Y, Z). The
/// weights are lumped quadrature weights; Euclidean when all ones.
struct WeightedSpace {
  Vec weights;

  explicit WeightedSpace(Vec w) : weights(std::move(w)) {}
  static WeightedSpace euclidean(Eigen::Index n) { return WeightedSpace(Vec::Ones(n)); }

  Eigen::Index dim() const { return weights.size(); }
  double inner(const Vec& a, const Vec& b) const {
    require_dim(a.size(), weights.size(), "WeightedSpace::inner a");
    require_dim(b.size(), weights.size(), "WeightedSpace::inner b");
    return (weights.array() * a.array() * b.array()).sum();
  }
  double norm(const Vec& a) const { return std::sqrt(std::max(0.0, inner(a, a))); }
};

/// Stored-matrix linear map from the DoF space into a boundary value space X
/// with diagonal weights `x_weights`. The adjoint pairs the X metric against
/// the plain dot-product duality on the DoF side.
class TraceOperator {
 public:
  TraceOperator(Mat m, Vec x_weights);

  Eigen::Index in_dim() const { return matrix_.cols(); }
  Eigen::Index out_dim() const { return matrix_.rows(); }
  const Mat& matrix() const { return matrix_; }
  const WeightedSpace& x_space() const { return xspace_; }

  Vec apply(const Vec& v) const;
  Vec apply_adjoint(const Vec& x) const;  // M^T W x

  static TraceOperator identity(Eigen::Index n);
  static TraceOperator scaled_identity(Eigen::Index n, double s);

 private:
  Mat matrix_;
  WeightedSpace xspace_;
};

inline Vec apply_trace(const TraceOperator& m, const Vec& v) { return m.apply(v); }
inline Vec apply_trace_adjoint(const TraceOperator& m, const Vec& x) { return m.apply_adjoint(x); }

/// Constraint set K: either the whole space or nodewise signed upper bounds
/// sign[i] * v[idx[i]] <= bound[i]. The sign accommodates caps written on a
/// normal component that points against a coordinate axis.
class ConstraintSet {
 public:
  enum class Kind { WholeSpace, NodewiseUpperBound };

  static ConstraintSet whole_space();
  static ConstraintSet nodewise(std::vector<int> indices, Vec bound);
  static ConstraintSet nodewise_signed(std::vector<int> indices, Vec bound, Vec sign);

  Kind kind() const { return kind_; }
  const std::vector<int>& indices() const { return indices_; }
  const Vec& bound() const { return bound_; }
  const Vec& sign() const { return sign_; }

  /// Clip onto the set (identity for whole-space). Total function.
  Vec project(const Vec& v) const;
  bool is_feasible(const Vec& v, double tol = 0.0) const;

 private:
  Kind kind_ = Kind::WholeSpace;
  std::vector<int> indices_;
  Vec bound_;
  Vec sign_;
};

inline Vec project_constraint(const Vec& v, const ConstraintSet& k) { return k.project(v); }

struct OperatorNormResult {
  double estimate = 0.0;       // certified upper bound: rayleigh * (1 + 1e-6)
  double rayleigh = 0.0;       // last Rayleigh quotient (sqrt)
  int iterations = 0;
  std::vector<double> history; // per-iteration sqrt Rayleigh values (nondecreasing)
};

/// Power iteration for ||M|| = sup ||Mv||_X / ||v||_V, i.e. the top eigenvalue
/// of G^-1 M^T W M in the V inner product. Throws ConvergenceError carrying
/// the last iterate when the cap is hit.
OperatorNormResult estimate_operator_norm(const TraceOperator& m, const EnergyMetric& metric,
                                          double tol = 1e-10, int max_iter = 10000);

}  // namespace vhi
