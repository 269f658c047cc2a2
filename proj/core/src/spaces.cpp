#include "vhi/spaces.hpp"

#include <cmath>
#include <cstdio>

namespace vhi {

std::string fmt_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

EnergyMetric::EnergyMetric(Mat gram) : gram_(std::move(gram)) {
  if (gram_.rows() != gram_.cols()) throw DimensionError("EnergyMetric: gram not square");
  double asym = (gram_ - gram_.transpose()).cwiseAbs().maxCoeff();
  double scale = std::max(1.0, gram_.cwiseAbs().maxCoeff());
  if (asym > 1e-12 * scale)
    throw Error("metric", "EnergyMetric: gram not symmetric (asym " + fmt_g17(asym) + ")");
  gram_ = 0.5 * (gram_ + gram_.transpose()).eval();
  llt_.compute(gram_);
  if (llt_.info() != Eigen::Success)
    throw Error("metric", "EnergyMetric: gram not positive definite (factorization failed)");
}

double EnergyMetric::inner(const Vec& u, const Vec& v) const {
  require_dim(u.size(), dim(), "EnergyMetric::inner u");
  require_dim(v.size(), dim(), "EnergyMetric::inner v");
  return u.dot(gram_ * v);
}

double EnergyMetric::norm(const Vec& u) const { return std::sqrt(std::max(0.0, inner(u, u))); }

double EnergyMetric::dual_norm(const Vec& r) const {
  require_dim(r.size(), dim(), "EnergyMetric::dual_norm");
  return std::sqrt(std::max(0.0, r.dot(llt_.solve(r))));
}

Vec EnergyMetric::solve(const Vec& r) const {
  require_dim(r.size(), dim(), "EnergyMetric::solve");
  return llt_.solve(r);
}

EnergyMetric EnergyMetric::identity(Eigen::Index n) { return EnergyMetric(Mat::Identity(n, n)); }

double v_norm(const Vec& u, const EnergyMetric& m) {
  require_dim(u.size(), m.dim(), "v_norm");
  return m.norm(u);
}

TraceOperator::TraceOperator(Mat m, Vec x_weights)
    : matrix_(std::move(m)), xspace_(std::move(x_weights)) {
  require_dim(xspace_.dim(), matrix_.rows(), "TraceOperator: weights vs rows");
  if ((xspace_.weights.array() <= 0.0).any())
    throw Error("trace", "TraceOperator: X weights must be positive");
}

Vec TraceOperator::apply(const Vec& v) const {
  require_dim(v.size(), in_dim(), "TraceOperator::apply");
  return matrix_ * v;
}

Vec TraceOperator::apply_adjoint(const Vec& x) const {
  require_dim(x.size(), out_dim(), "TraceOperator::apply_adjoint");
  return matrix_.transpose() * (xspace_.weights.array() * x.array()).matrix();
}

TraceOperator TraceOperator::identity(Eigen::Index n) {
  return TraceOperator(Mat::Identity(n, n), Vec::Ones(n));
}

TraceOperator TraceOperator::scaled_identity(Eigen::Index n, double s) {
  return TraceOperator(s * Mat::Identity(n, n), Vec::Ones(n));
}

ConstraintSet ConstraintSet::whole_space() { return ConstraintSet{}; }

ConstraintSet ConstraintSet::nodewise(std::vector<int> indices, Vec bound) {
  return nodewise_signed(std::move(indices), std::move(bound),
                         Vec::Ones(static_cast<Eigen::Index>(bound.size())));
}

ConstraintSet ConstraintSet::nodewise_signed(std::vector<int> indices, Vec bound, Vec sign) {
  ConstraintSet k;
  k.kind_ = Kind::NodewiseUpperBound;
  k.indices_ = std::move(indices);
  k.bound_ = std::move(bound);
  k.sign_ = std::move(sign);
  require_dim(k.bound_.size(), static_cast<Eigen::Index>(k.indices_.size()), "ConstraintSet bound");
  require_dim(k.sign_.size(), static_cast<Eigen::Index>(k.indices_.size()), "ConstraintSet sign");
  require_finite(k.bound_, "ConstraintSet bound");
  for (Eigen::Index i = 0; i < k.sign_.size(); ++i)
    if (k.sign_[i] != 1.0 && k.sign_[i] != -1.0)
      throw Error("constraint", "ConstraintSet: sign entries must be +1 or -1");
  return k;
}

Vec ConstraintSet::project(const Vec& v) const {
  if (kind_ == Kind::WholeSpace) return v;
  Vec out = v;
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    const int idx = indices_[i];
    const double s = sign_[static_cast<Eigen::Index>(i)];
    const double b = bound_[static_cast<Eigen::Index>(i)];
    // s * v[idx] <= b  =>  v[idx] clipped toward feasibility
    if (s * out[idx] > b) out[idx] = s * b;
  }
  return out;
}

bool ConstraintSet::is_feasible(const Vec& v, double tol) const {
  if (kind_ == Kind::WholeSpace) return true;
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    const double s = sign_[static_cast<Eigen::Index>(i)];
    if (s * v[indices_[i]] > bound_[static_cast<Eigen::Index>(i)] + tol) return false;
  }
  return true;
}

OperatorNormResult estimate_operator_norm(const TraceOperator& m, const EnergyMetric& metric,
                                          double tol, int max_iter) {
  require_dim(m.in_dim(), metric.dim(), "estimate_operator_norm");
  const Eigen::Index n = metric.dim();
  OperatorNormResult res;
  if (n == 0 || m.out_dim() == 0) return res;

  // Power iteration on T = G^-1 M^T W M, symmetric PSD in the V inner product.
  Vec v = Vec::Ones(n);
  double vn = metric.norm(v);
  if (vn == 0.0) {
    v = Vec::Zero(n);
    v[0] = 1.0;
    vn = metric.norm(v);
  }
  v /= vn;

  double prev = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    Vec mv = m.apply(v);
    double rq = m.x_space().inner(mv, mv);  // (v, Tv)_G for V-normalized v
    double lam = std::sqrt(std::max(0.0, rq));
    res.history.push_back(lam);
    res.iterations = it;
    res.rayleigh = lam;
    if (prev >= 0.0 && std::abs(lam - prev) <= tol * std::max(1.0, lam)) {
      res.estimate = lam * (1.0 + 1e-6);
      return res;
    }
    prev = lam;
    Vec tv = metric.solve(m.apply_adjoint(mv));
    double tn = metric.norm(tv);
    if (tn == 0.0) {
      // Start vector fell into the kernel. Restart from a canonical direction;
      // give up (norm 0) only if every canonical direction is mapped to zero.
      bool restarted = false;
      for (Eigen::Index k = 0; k < n; ++k) {
        Vec e = Vec::Zero(n);
        e[k] = 1.0;
        if (m.apply(e).cwiseAbs().maxCoeff() > 0.0) {
          v = e / metric.norm(e);
          prev = -1.0;
          restarted = true;
          break;
        }
      }
      if (!restarted) {
        res.estimate = 0.0;
        res.rayleigh = 0.0;
        return res;
      }
      continue;
    }
    v = tv / tn;
  }
  throw ConvergenceError("estimate_operator_norm: no convergence after " +
                             std::to_string(max_iter) + " iterations (last " +
                             fmt_g17(res.rayleigh) + ")",
                         res.history);
}

}  // namespace vhi
