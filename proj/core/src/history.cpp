#include "vhi/history.hpp"

#include <cmath>

namespace vhi {

double quad_weight(const TimeGrid& g, QuadratureRule rule, int n, int k) {
  if (n == 0) return 0.0;
  const double dt = g.dt();
  if (rule == QuadratureRule::LeftRectangle) return k < n ? dt : 0.0;
  if (k == 0 || k == n) return 0.5 * dt;
  return k < n ? dt : 0.0;
}

double traj_l2_norm(const Trajectory& w, const EnergyMetric& metric, QuadratureRule rule, int n) {
  if (n < 0) n = w.grid.N;
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double q = quad_weight(w.grid, rule, n, k);
    if (q == 0.0) continue;
    const double nn = metric.norm(w.at(k));
    acc += q * nn * nn;
  }
  return std::sqrt(acc);
}

double traj_l2_distance(const Trajectory& a, const Trajectory& b, const EnergyMetric& metric,
                        QuadratureRule rule, int n) {
  if (a.grid.N != b.grid.N) throw DimensionError("traj_l2_distance: grids differ");
  if (n < 0) n = a.grid.N;
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double q = quad_weight(a.grid, rule, n, k);
    if (q == 0.0) continue;
    const double nn = metric.norm(a.at(k) - b.at(k));
    acc += q * nn * nn;
  }
  return std::sqrt(acc);
}

Vec integrate_displacement(const Trajectory& w, int n, const Vec& u0, QuadratureRule rule) {
  if (n < 0 || n > w.grid.N)
    throw Error("index", "integrate_displacement: node " + std::to_string(n) + " outside grid");
  Vec acc = u0;
  for (int k = 0; k <= n; ++k) {
    const double q = quad_weight(w.grid, rule, n, k);
    if (q != 0.0) acc += q * w.at(k);
  }
  return acc;
}

Vec HistoryOperator::eval(const Trajectory& w, int n) const {
  if (n < 0 || n > w.grid.N)
    throw Error("index", "HistoryOperator(" + kind_ + "): node " + std::to_string(n) +
                             " outside grid");
  return eval_impl(w, n);
}

std::vector<Vec> HistoryOperator::eval_all(const Trajectory& w) const {
  std::vector<Vec> out(static_cast<std::size_t>(w.grid.count()));
  for (int n = 0; n <= w.grid.N; ++n) out[static_cast<std::size_t>(n)] = eval(w, n);
  return out;
}

namespace {

class ZeroHistory final : public HistoryOperator {
 public:
  ZeroHistory(Eigen::Index d, QuadratureRule rule)
      : HistoryOperator("R2-zero", rule, WeightedSpace::euclidean(d)) {}

 protected:
  Vec eval_impl(const Trajectory&, int) const override { return Vec::Zero(out_dim()); }
};

class IntegralMapHistory final : public HistoryOperator {
 public:
  IntegralMapHistory(Mat L, Vec u0, WeightedSpace out, QuadratureRule rule)
      : HistoryOperator("integral-map", rule, std::move(out)), L_(std::move(L)), u0_(std::move(u0)) {
    require_dim(L_.rows(), out_dim(), "IntegralMapHistory rows");
    require_dim(u0_.size(), L_.cols(), "IntegralMapHistory u0");
  }

  std::vector<Vec> eval_all(const Trajectory& w) const override {
    std::vector<Vec> out(static_cast<std::size_t>(w.grid.count()));
    const double dt = w.grid.dt();
    Vec u = u0_;
    for (int n = 0; n <= w.grid.N; ++n) {
      if (n > 0) {
        if (rule() == QuadratureRule::LeftRectangle)
          u += dt * w.at(n - 1);
        else
          u += 0.5 * dt * (w.at(n - 1) + w.at(n));
      }
      out[static_cast<std::size_t>(n)] = L_ * u;
    }
    return out;
  }

 protected:
  Vec eval_impl(const Trajectory& w, int n) const override {
    return L_ * integrate_displacement(w, n, u0_, rule());
  }

 private:
  Mat L_;
  Vec u0_;
};

class ConvolutionHistory final : public HistoryOperator {
 public:
  ConvolutionHistory(Mat L, std::function<double(double)> kappa, WeightedSpace out,
                     QuadratureRule rule)
      : HistoryOperator("volterra-convolution", rule, std::move(out)), L_(std::move(L)),
        kappa_(std::move(kappa)) {
    require_dim(L_.rows(), out_dim(), "ConvolutionHistory rows");
  }

 protected:
  Vec eval_impl(const Trajectory& w, int n) const override {
    Vec acc = Vec::Zero(out_dim());
    const double tn = w.grid.node(n);
    for (int k = 0; k <= n; ++k) {
      const double q = quad_weight(w.grid, rule(), n, k);
      if (q == 0.0) continue;
      acc += (q * kappa_(tn - w.grid.node(k))) * (L_ * w.at(k));
    }
    return acc;
  }

 private:
  Mat L_;
  std::function<double(double)> kappa_;
};

class AccumulatedNormHistory final : public HistoryOperator {
 public:
  AccumulatedNormHistory(Mat P, Vec u0, WeightedSpace out, QuadratureRule rule)
      : HistoryOperator("accumulated-norm", rule, std::move(out)), P_(std::move(P)),
        u0_(std::move(u0)) {
    require_dim(P_.rows(), out_dim(), "AccumulatedNormHistory rows");
    require_dim(u0_.size(), P_.cols(), "AccumulatedNormHistory u0");
  }

  std::vector<Vec> eval_all(const Trajectory& w) const override {
    std::vector<Vec> out(static_cast<std::size_t>(w.grid.count()));
    const double dt = w.grid.dt();
    Vec u = u0_;
    std::vector<Vec> pu(static_cast<std::size_t>(w.grid.count()));
    for (int s = 0; s <= w.grid.N; ++s) {
      if (s > 0) {
        if (rule() == QuadratureRule::LeftRectangle)
          u += dt * w.at(s - 1);
        else
          u += 0.5 * dt * (w.at(s - 1) + w.at(s));
      }
      pu[static_cast<std::size_t>(s)] = (P_ * u).cwiseAbs();
    }
    Vec acc = Vec::Zero(out_dim());
    for (int n = 0; n <= w.grid.N; ++n) {
      if (n > 0) {
        if (rule() == QuadratureRule::LeftRectangle)
          acc += dt * pu[static_cast<std::size_t>(n - 1)];
        else
          acc += 0.5 * dt * (pu[static_cast<std::size_t>(n - 1)] + pu[static_cast<std::size_t>(n)]);
      }
      out[static_cast<std::size_t>(n)] = acc;
    }
    return out;
  }

 protected:
  Vec eval_impl(const Trajectory& w, int n) const override {
    // Single forward pass with running inner prefix.
    const double dt = w.grid.dt();
    Vec u = u0_;
    Vec prev_h;
    Vec acc = Vec::Zero(out_dim());
    for (int s = 0; s <= n; ++s) {
      if (s > 0) {
        if (rule() == QuadratureRule::LeftRectangle)
          u += dt * w.at(s - 1);
        else
          u += 0.5 * dt * (w.at(s - 1) + w.at(s));
      }
      Vec h = (P_ * u).cwiseAbs();
      if (s > 0) {
        if (rule() == QuadratureRule::LeftRectangle)
          acc += dt * prev_h;
        else
          acc += 0.5 * dt * (prev_h + h);
      }
      prev_h = std::move(h);
    }
    return acc;
  }

 private:
  Mat P_;
  Vec u0_;
};

class SumHistory final : public HistoryOperator {
 public:
  SumHistory(HistoryPtr a, HistoryPtr b)
      : HistoryOperator(a->kind() + "+" + b->kind(), a->rule(), a->out_space()), a_(std::move(a)),
        b_(std::move(b)) {
    require_dim(b_->out_dim(), a_->out_dim(), "SumHistory dims");
    if (a_->rule() != b_->rule()) throw Error("history", "SumHistory: mixed quadrature rules");
  }

  std::vector<Vec> eval_all(const Trajectory& w) const override {
    auto va = a_->eval_all(w);
    auto vb = b_->eval_all(w);
    for (std::size_t i = 0; i < va.size(); ++i) va[i] += vb[i];
    return va;
  }

 protected:
  Vec eval_impl(const Trajectory& w, int n) const override { return a_->eval(w, n) + b_->eval(w, n); }

 private:
  HistoryPtr a_, b_;
};

class StackHistory final : public HistoryOperator {
 public:
  StackHistory(HistoryPtr a, HistoryPtr b)
      : HistoryOperator(a->kind() + "|" + b->kind(), a->rule(), stacked_space(*a, *b)),
        a_(std::move(a)), b_(std::move(b)) {
    if (a_->rule() != b_->rule()) throw Error("history", "StackHistory: mixed quadrature rules");
  }

  std::vector<Vec> eval_all(const Trajectory& w) const override {
    auto va = a_->eval_all(w);
    auto vb = b_->eval_all(w);
    std::vector<Vec> out(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) {
      Vec v(a_->out_dim() + b_->out_dim());
      v << va[i], vb[i];
      out[i] = std::move(v);
    }
    return out;
  }

 protected:
  Vec eval_impl(const Trajectory& w, int n) const override {
    Vec v(a_->out_dim() + b_->out_dim());
    v << a_->eval(w, n), b_->eval(w, n);
    return v;
  }

 private:
  static WeightedSpace stacked_space(const HistoryOperator& a, const HistoryOperator& b) {
    Vec w(a.out_dim() + b.out_dim());
    w << a.out_space().weights, b.out_space().weights;
    return WeightedSpace(std::move(w));
  }

  HistoryPtr a_, b_;
};

}  // namespace

HistoryPtr zero_history(Eigen::Index out_dim, QuadratureRule rule) {
  return std::make_shared<ZeroHistory>(out_dim, rule);
}

HistoryPtr integral_map_history(Mat L, Vec u0, WeightedSpace out, QuadratureRule rule) {
  return std::make_shared<IntegralMapHistory>(std::move(L), std::move(u0), std::move(out), rule);
}

HistoryPtr convolution_history(Mat L, std::function<double(double)> kappa, WeightedSpace out,
                               QuadratureRule rule) {
  return std::make_shared<ConvolutionHistory>(std::move(L), std::move(kappa), std::move(out), rule);
}

HistoryPtr accumulated_norm_history(Mat P, Vec u0, WeightedSpace out, QuadratureRule rule) {
  return std::make_shared<AccumulatedNormHistory>(std::move(P), std::move(u0), std::move(out), rule);
}

HistoryPtr sum_history(HistoryPtr a, HistoryPtr b) {
  return std::make_shared<SumHistory>(std::move(a), std::move(b));
}

HistoryPtr stack_history(HistoryPtr a, HistoryPtr b) {
  return std::make_shared<StackHistory>(std::move(a), std::move(b));
}

HistoryLipschitzReport audit_history_lipschitz(
    const HistoryOperator& op, const EnergyMetric& metric,
    const std::vector<std::pair<Trajectory, Trajectory>>& pairs, double claimed_c_R) {
  HistoryLipschitzReport rep;
  int pair_idx = 0;
  for (const auto& [v1, v2] : pairs) {
    if (v1.grid.N != v2.grid.N) throw DimensionError("audit_history_lipschitz: grids differ");
    auto o1 = op.eval_all(v1);
    auto o2 = op.eval_all(v2);
    for (int n = 0; n <= v1.grid.N; ++n) {
      double den = 0.0;
      for (int k = 0; k <= n; ++k)
        den += quad_weight(v1.grid, op.rule(), n, k) * metric.norm(v1.at(k) - v2.at(k));
      const double num =
          op.out_space().norm(o1[static_cast<std::size_t>(n)] - o2[static_cast<std::size_t>(n)]);
      if (den == 0.0) {
        if (num > 0.0) {  // history produced a difference with no input difference
          rep.max_quotient = std::numeric_limits<double>::infinity();
          rep.worst_node = n;
          rep.worst_pair = pair_idx;
        } else {
          rep.skipped_nodes++;
        }
        continue;
      }
      const double q = num / den;
      if (q > rep.max_quotient) {
        rep.max_quotient = q;
        rep.worst_node = n;
        rep.worst_pair = pair_idx;
      }
    }
    ++pair_idx;
  }
  rep.pass = rep.max_quotient <= claimed_c_R * (1.0 + 1e-6);
  return rep;
}

}  // namespace vhi
