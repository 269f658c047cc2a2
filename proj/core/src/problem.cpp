#include "vhi/problem.hpp"

#include <cmath>

namespace vhi {

double smallness_margin(const HypothesisConstants& h) {
  return h.m_A - h.m_j * h.M_norm * h.M_norm - h.alpha_phi;
}

ConvexPotential ConvexPotential::zero(const ConstraintSet& k) {
  ConvexPotential p;
  p.value_diff = [](double, const Vec&, const Vec&, const Vec&, const Vec&) { return 0.0; };
  p.prox = [k](double, const Vec&, const Vec&, const Vec& x, double) { return k.project(x); };
  return p;
}

LipschitzPotential LipschitzPotential::zero(Eigen::Index x_dim) {
  LipschitzPotential j;
  j.dir_deriv = [](double, const Vec&, const Vec&, const Vec&) { return 0.0; };
  j.subgrad_select = [x_dim](double, const Vec&, const Vec&) { return Vec::Zero(x_dim); };
  return j;
}

double PrototypePotential::j0(double t, const Vec& zeta, const Vec& x, const Vec& d) const {
  require_dim(x.size(), weights.size(), "PrototypePotential::j0 x");
  require_dim(d.size(), weights.size(), "PrototypePotential::j0 d");
  const double a = alpha(t, zeta);
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += weights[i] * g.dir_deriv(x[i], d[i]);
  return a * s;
}

Vec PrototypePotential::subgrad(double t, const Vec& zeta, const Vec& x) const {
  require_dim(x.size(), weights.size(), "PrototypePotential::subgrad");
  const double a = alpha(t, zeta);
  Vec s(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) s[i] = a * g.select(x[i]);
  return s;
}

LipschitzPotential PrototypePotential::as_potential() const {
  LipschitzPotential j;
  auto self = *this;
  j.dir_deriv = [self](double t, const Vec& z, const Vec& x, const Vec& d) {
    return self.j0(t, z, x, d);
  };
  j.subgrad_select = [self](double t, const Vec& z, const Vec& x) {
    return self.subgrad(t, z, x);
  };
  return j;
}

double j0_prototype(const PrototypePotential& p, double t, const Vec& zeta, const Vec& x,
                    const Vec& d) {
  return p.j0(t, zeta, x, d);
}

namespace {

RelaxedMonotonicityReport worst_pair(const ScalarLaw& g, const std::vector<double>& v1s,
                                     const std::vector<double>& v2s, double claimed_m_g) {
  RelaxedMonotonicityReport rep;
  rep.min_quotient = std::numeric_limits<double>::infinity();
  for (double a : v1s)
    for (double b : v2s) {
      const double dv = a - b;
      if (dv == 0.0) continue;
      const double q = (g.select(a) - g.select(b)) * dv / (dv * dv) + claimed_m_g;
      if (q < rep.min_quotient) {
        rep.min_quotient = q;
        rep.witness_v1 = a;
        rep.witness_v2 = b;
      }
    }
  if (!std::isfinite(rep.min_quotient)) rep.min_quotient = claimed_m_g;  // no valid pair
  rep.pass = rep.min_quotient >= -1e-12 * std::max(1.0, std::abs(claimed_m_g));
  return rep;
}

}  // namespace

RelaxedMonotonicityReport check_relaxed_monotonicity(const PrototypePotential& pot,
                                                     int sample_count, double radius,
                                                     double claimed_m_g, std::uint64_t seed) {
  if (sample_count < 1) throw Error("audit", "check_relaxed_monotonicity: sample_count >= 1");
  Rng rng(seed);
  std::uniform_real_distribution<double> U(-radius, radius);
  std::vector<double> v1s(static_cast<std::size_t>(sample_count));
  std::vector<double> v2s(static_cast<std::size_t>(sample_count));
  for (auto& v : v1s) v = U(rng);
  for (auto& v : v2s) v = U(rng);
  return worst_pair(pot.g, v1s, v2s, claimed_m_g);
}

RelaxedMonotonicityReport scan_relaxed_monotonicity(const ScalarLaw& g, double lo, double hi,
                                                    int grid, double claimed_m_g) {
  std::vector<double> pts(static_cast<std::size_t>(grid));
  for (int i = 0; i < grid; ++i)
    pts[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (grid - 1);
  return worst_pair(g, pts, pts, claimed_m_g);
}

}  // namespace vhi
