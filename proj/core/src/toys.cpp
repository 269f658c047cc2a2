#include "vhi/toys.hpp"

#include <cmath>

namespace vhi {

namespace {

double sat(double r) { return r / (1.0 + r); }  // 1-Lipschitz on [0, inf)

Vec vec1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

/// 1D instance family: A(w) = a w, f constant, phi = (c0 + cw sat(|w|)) |v|,
/// j = alpha0 * g, optional cap v <= b.
struct Scalar1DSpec {
  std::string name, description;
  double a = 1.0;
  double f = 0.0;
  double c0 = 0.0, cw = 0.0;  // phi coefficients
  double alpha0 = 0.0;        // j coefficient
  ScalarLaw g = ScalarLaw::quadratic(1.0);
  bool capped = false;
  double cap = 0.0;
  double expected = 0.0;
  std::string expected_kind = "closed-form";
};

AbstractProblem build_scalar(const Scalar1DSpec& s) {
  AbstractProblem p;
  p.name = s.name;
  p.dim = 1;
  p.metric = std::make_shared<EnergyMetric>(EnergyMetric::identity(1));
  p.constraint = s.capped ? ConstraintSet::nodewise({0}, vec1(s.cap)) : ConstraintSet::whole_space();
  p.trace = std::make_shared<TraceOperator>(TraceOperator::identity(1));
  p.e_space = WeightedSpace::euclidean(1);
  p.y_space = WeightedSpace::euclidean(1);
  p.z_space = WeightedSpace::euclidean(1);

  const double a = s.a, f = s.f;
  p.A = [a](double, const Vec& lambda, const Vec& v) -> Vec { return a * v + lambda; };
  p.f = [f](double, const Vec&) -> Vec { return vec1(f); };

  const double c0 = s.c0, cw = s.cw;
  const ConstraintSet k = p.constraint;
  if (c0 == 0.0 && cw == 0.0) {
    p.phi = ConvexPotential::zero(k);
  } else {
    p.phi.value_diff = [c0, cw](double, const Vec&, const Vec& w, const Vec& v1, const Vec& v2) {
      const double c = c0 + cw * sat(std::abs(w[0]));
      return c * (std::abs(v1[0]) - std::abs(v2[0]));
    };
    p.phi.prox = [c0, cw, k](double, const Vec&, const Vec& w, const Vec& x, double rho) -> Vec {
      const double c = c0 + cw * sat(std::abs(w[0]));
      const double t = rho * c;
      double y = 0.0;
      if (x[0] > t) y = x[0] - t;
      if (x[0] < -t) y = x[0] + t;
      return k.project(vec1(y));
    };
  }

  if (s.alpha0 == 0.0) {
    p.j = LipschitzPotential::zero(1);
  } else {
    PrototypePotential proto;
    const double a0 = s.alpha0;
    proto.alpha = [a0](double, const Vec&) { return a0; };
    proto.alpha0 = a0;
    proto.g = s.g;
    proto.weights = Vec::Ones(1);
    p.j = proto.as_potential();
  }

  HypothesisConstants c;
  c.m_A = s.a;
  c.mbar_A = 1.0;
  c.a0_max = 0.0;
  c.a1 = 1.0;
  c.a2 = s.a;
  c.L_f = 0.0;
  c.alpha_phi = s.cw;
  c.beta_phi = 0.0;
  c.c0j_max = s.alpha0 * s.g.deriv_bound();
  c.m_j = s.alpha0 * s.g.relaxed_monotonicity_constant();
  c.m_1 = 0.0;
  c.M_norm = 1.0;
  p.constants = c;
  const double slope = s.c0 + s.cw;
  p.phi_lip = [slope](double, double, double) { return slope; };

  p.r1 = zero_history(1);
  p.r2 = zero_history(1);
  p.r3 = zero_history(1);
  p.r4 = zero_history(1);
  p.sample_scale = 1.0;
  return p;
}

AbstractProblem build_dim2(const std::string& name, bool box, bool l1_trace) {
  AbstractProblem p;
  p.name = name;
  p.dim = 2;
  p.metric = std::make_shared<EnergyMetric>(EnergyMetric::identity(2));
  Mat K(2, 2);
  K << 3.0, 1.0, 1.0, 2.0;
  Vec f(2);
  f << 1.0, 1.0;

  if (box) {
    Vec bound(2);
    bound << 0.15, 10.0;
    p.constraint = ConstraintSet::nodewise({0, 1}, bound);
  } else {
    p.constraint = ConstraintSet::whole_space();
  }

  if (l1_trace) {
    Mat m(1, 2);
    m << 1.0, 0.0;
    p.trace = std::make_shared<TraceOperator>(m, Vec::Ones(1));
  } else {
    p.trace = std::make_shared<TraceOperator>(TraceOperator::identity(2));
  }
  p.e_space = WeightedSpace::euclidean(2);
  p.y_space = WeightedSpace::euclidean(1);
  p.z_space = WeightedSpace::euclidean(1);

  p.A = [K](double, const Vec& lambda, const Vec& v) -> Vec { return K * v + lambda; };
  p.f = [f](double, const Vec&) -> Vec { return f; };

  const ConstraintSet k = p.constraint;
  const double l1c = l1_trace ? 0.3 : 0.0;
  if (l1c == 0.0) {
    p.phi = ConvexPotential::zero(k);
  } else {
    p.phi.value_diff = [l1c](double, const Vec&, const Vec&, const Vec& v1, const Vec& v2) {
      return l1c * (v1.lpNorm<1>() - v2.lpNorm<1>());
    };
    p.phi.prox = [l1c, k](double, const Vec&, const Vec&, const Vec& x, double rho) -> Vec {
      Vec y(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double t = rho * l1c;
        y[i] = x[i] > t ? x[i] - t : (x[i] < -t ? x[i] + t : 0.0);
      }
      return k.project(y);
    };
  }

  if (l1_trace) {
    PrototypePotential proto;
    proto.alpha = [](double, const Vec&) { return 0.2; };
    proto.alpha0 = 0.2;
    proto.g = default_normal_damper_law();
    proto.weights = Vec::Ones(1);
    p.j = proto.as_potential();
  } else {
    p.j = LipschitzPotential::zero(p.trace->out_dim());
  }

  Eigen::SelfAdjointEigenSolver<Mat> es(K);
  HypothesisConstants c;
  c.m_A = es.eigenvalues().minCoeff();
  c.mbar_A = 1.0;
  c.a1 = 1.0;
  c.a2 = es.eigenvalues().maxCoeff();
  c.alpha_phi = 0.0;
  c.c0j_max = l1_trace ? 0.2 * 2.0 : 0.0;
  c.m_j = l1_trace ? 0.2 * 1.0 : 0.0;
  c.M_norm = 1.0;
  p.constants = c;
  const double slope = l1c * std::sqrt(2.0);
  p.phi_lip = [slope](double, double, double) { return slope; };

  p.r1 = zero_history(2);
  p.r2 = zero_history(p.trace->out_dim());
  p.r3 = zero_history(1);
  p.r4 = zero_history(1);
  p.sample_scale = 1.0;
  return p;
}

}  // namespace

std::vector<FrozenInstance> frozen_oracle_instances() {
  std::vector<FrozenInstance> out;
  auto add_scalar = [&](Scalar1DSpec s) {
    FrozenInstance fi;
    fi.name = s.name;
    fi.description = s.description;
    fi.problem = build_scalar(s);
    fi.data = FrozenData::zero(fi.problem);
    fi.expected = vec1(s.expected);
    fi.expected_kind = s.expected_kind;
    out.push_back(std::move(fi));
  };

  add_scalar({.name = "scalar-basic", .description = "A(w) = 2w, f = 1, cap 10", .a = 2.0,
              .f = 1.0, .capped = true, .cap = 10.0, .expected = 0.5});
  add_scalar({.name = "scalar-constrained", .description = "A(w) = 2w, f = 30, cap 10 active",
              .a = 2.0, .f = 30.0, .capped = true, .cap = 10.0, .expected = 10.0});
  add_scalar({.name = "scalar-l1-zero", .description = "A(w) = w, f = 0.5, phi = |v|", .a = 1.0,
              .f = 0.5, .c0 = 1.0, .expected = 0.0, .expected_kind = "grid-search"});
  add_scalar({.name = "scalar-l1-one", .description = "A(w) = w, f = 2, phi = |v|", .a = 1.0,
              .f = 2.0, .c0 = 1.0, .expected = 1.0, .expected_kind = "grid-search"});
  add_scalar({.name = "scalar-l1-neg", .description = "A(w) = w, f = -2, phi = |v|", .a = 1.0,
              .f = -2.0, .c0 = 1.0, .expected = -1.0, .expected_kind = "grid-search"});
  add_scalar({.name = "scalar-l1-cap", .description = "A(w) = w, f = 3, phi = |v|, cap 1.5",
              .a = 1.0, .f = 3.0, .c0 = 1.0, .capped = true, .cap = 1.5, .expected = 1.5,
              .expected_kind = "grid-search"});
  add_scalar({.name = "scalar-quad-g", .description = "A(w) = 2w, f = 1.5, j = 0.5 g", .a = 2.0,
              .f = 1.5, .alpha0 = 0.5, .g = default_normal_damper_law(), .expected = 0.5,
              .expected_kind = "grid-search"});
  add_scalar({.name = "scalar-g-kink", .description = "A(w) = 2w, f = 2.2, j = g", .a = 2.0,
              .f = 2.2, .alpha0 = 1.0, .g = default_normal_damper_law(), .expected = 0.55,
              .expected_kind = "grid-search"});
  add_scalar({.name = "scalar-quasi", .description = "A(w) = w, f = 1.2, quasi phi", .a = 1.0,
              .f = 1.2, .cw = 0.3,
              .expected = 0.5 * (-0.1 + std::sqrt(4.81)), .expected_kind = "closed-form"});

  {
    FrozenInstance fi;
    fi.name = "dim2-quad";
    fi.description = "2x2 SPD, unconstrained";
    fi.problem = build_dim2(fi.name, false, false);
    fi.data = FrozenData::zero(fi.problem);
    fi.expected = Vec(2);
    fi.expected << 0.2, 0.4;
    fi.expected_kind = "closed-form";
    out.push_back(std::move(fi));
  }
  {
    FrozenInstance fi;
    fi.name = "dim2-box";
    fi.description = "2x2 SPD, cap (0.15, 10)";
    fi.problem = build_dim2(fi.name, true, false);
    fi.data = FrozenData::zero(fi.problem);
    fi.expected = Vec(2);
    fi.expected << 0.15, 0.425;
    fi.expected_kind = "grid-search";
    out.push_back(std::move(fi));
  }
  {
    FrozenInstance fi;
    fi.name = "dim2-l1-trace";
    fi.description = "2x2 SPD with l1 potential and nonconvex trace term";
    fi.problem = build_dim2(fi.name, false, true);
    fi.data = FrozenData::zero(fi.problem);
    fi.expected = Vec(2);
    fi.expected << 0.7 - 2.0 * (1.68 / 5.8), 1.68 / 5.8;
    fi.expected_kind = "grid-search";
    out.push_back(std::move(fi));
  }
  return out;
}

AbstractProblem make_scalar_ode(QuadratureRule rule) {
  AbstractProblem p;
  p.name = "scalar-ode";
  p.dim = 1;
  p.metric = std::make_shared<EnergyMetric>(EnergyMetric::identity(1));
  p.constraint = ConstraintSet::whole_space();
  p.trace = std::make_shared<TraceOperator>(TraceOperator::identity(1));
  p.e_space = WeightedSpace::euclidean(1);
  p.y_space = WeightedSpace::euclidean(1);
  p.z_space = WeightedSpace::euclidean(1);
  p.A = [](double, const Vec& lambda, const Vec& v) -> Vec { return v + lambda; };
  p.f = [](double, const Vec&) -> Vec { return vec1(1.0); };
  p.phi = ConvexPotential::zero(p.constraint);
  p.j = LipschitzPotential::zero(1);
  HypothesisConstants c;
  c.m_A = 1.0;
  c.mbar_A = 1.0;
  c.a1 = 1.0;
  c.a2 = 1.0;
  c.c_R1 = 1.0;
  c.M_norm = 1.0;
  p.constants = c;
  p.phi_lip = [](double, double, double) { return 0.0; };
  p.r1 = integral_map_history(Mat::Identity(1, 1), Vec::Zero(1), WeightedSpace::euclidean(1), rule);
  p.r2 = zero_history(1, rule);
  p.r3 = zero_history(1, rule);
  p.r4 = zero_history(1, rule);
  p.sample_scale = 1.0;
  return p;
}

AbstractProblem make_dim4(double horizon, QuadratureRule rule) {
  AbstractProblem p;
  p.name = "dim4-full";
  p.dim = 4;
  p.metric = std::make_shared<EnergyMetric>(EnergyMetric::identity(4));
  Vec bound(1);
  bound << 0.8;
  p.constraint = ConstraintSet::nodewise({0}, bound);

  Mat K(4, 4);
  K << 2.0, 0.3, 0.0, 0.1,
       0.3, 1.7, 0.2, 0.0,
       0.0, 0.2, 1.5, 0.1,
       0.1, 0.0, 0.1, 1.3;

  Mat Mmat = Mat::Zero(2, 4);
  Mmat(0, 0) = 0.8;
  Mmat(1, 1) = 0.8;
  p.trace = std::make_shared<TraceOperator>(Mmat, Vec::Ones(2));
  p.e_space = WeightedSpace::euclidean(4);
  p.y_space = WeightedSpace::euclidean(2);
  p.z_space = WeightedSpace::euclidean(1);

  p.A = [K](double, const Vec& lambda, const Vec& v) -> Vec { return K * v + 0.5 * lambda; };
  Vec b0(4), b1(4);
  b0 << 1.5, -0.5, 1.0, 0.8;
  b1 << 0.2, 0.1, -0.1, 0.0;
  const Mat Mt = Mmat.transpose();
  p.f = [b0, b1, Mt](double t, const Vec& xi) -> Vec { return b0 + t * b1 + 0.3 * (Mt * xi); };

  const ConstraintSet k = p.constraint;
  auto coeff = [](const Vec& w, const Vec& eta) {
    return 0.05 + 0.04 * sat(w.norm()) + 0.03 * sat(eta.lpNorm<1>());
  };
  p.phi.value_diff = [coeff](double, const Vec& eta, const Vec& w, const Vec& v1, const Vec& v2) {
    return coeff(w, eta) * (v1.lpNorm<1>() - v2.lpNorm<1>());
  };
  p.phi.prox = [coeff, k](double, const Vec& eta, const Vec& w, const Vec& x, double rho) -> Vec {
    const double t = rho * coeff(w, eta);
    Vec y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      y[i] = x[i] > t ? x[i] - t : (x[i] < -t ? x[i] + t : 0.0);
    return k.project(y);
  };

  PrototypePotential proto;
  proto.alpha = [](double, const Vec& zeta) { return 0.04 * (1.0 + sat(std::abs(zeta[0]))); };
  proto.alpha0 = 0.08;
  proto.g = default_normal_damper_law();
  proto.weights = Vec::Ones(2);
  p.j = proto.as_potential();

  Eigen::SelfAdjointEigenSolver<Mat> es(K);
  HypothesisConstants c;
  c.m_A = es.eigenvalues().minCoeff();
  c.mbar_A = 0.5;
  c.a0_max = 0.0;
  c.a1 = 0.5;
  c.a2 = es.eigenvalues().maxCoeff();
  c.L_f = 0.3 * 0.8;
  c.alpha_phi = 0.04 * 2.0;               // sat Lipschitz 1, |v|_1 gap <= 2 |dv|_2
  c.beta_phi = 0.03 * std::sqrt(2.0) * 2.0;
  c.c0j_max = 0.08 * 2.0 * std::sqrt(2.0);
  c.c1j = 0.0;
  c.c2j = 0.0;
  c.m_j = 0.08 * 1.0;                     // alpha0 * m_g (X-level constant)
  c.m_1 = 0.04 * 2.0 * std::sqrt(2.0);    // L_alpha * c0bar * sqrt(dim X)
  c.c_R1 = 0.8;
  c.c_R2 = 0.32;
  c.c_R3 = 0.3 * std::sqrt(1.0 + horizon * horizon);
  c.c_R4 = 0.5 * std::sqrt(2.0);
  c.M_norm = 0.8;
  p.constants = c;
  p.phi_lip = [](double, double, double) { return 0.24; };

  const WeightedSpace e4 = WeightedSpace::euclidean(4);
  p.r1 = sum_history(
      convolution_history(0.5 * Mat::Identity(4, 4), [](double s) { return std::exp(-s); }, e4,
                          rule),
      integral_map_history(0.3 * Mat::Identity(4, 4), Vec::Zero(4), e4, rule));
  p.r2 = integral_map_history(0.4 * Mmat, Vec::Zero(4), WeightedSpace::euclidean(2), rule);
  Mat P1(1, 4), P2(1, 4), P4(1, 4);
  P1 << 0.3, 0.0, 0.0, 0.0;
  P2 << 0.0, 0.3, 0.0, 0.0;
  P4 << 0.5, 0.0, 0.0, 0.5;
  p.r3 = stack_history(
      accumulated_norm_history(P1, Vec::Zero(4), WeightedSpace::euclidean(1), rule),
      integral_map_history(P2, Vec::Zero(4), WeightedSpace::euclidean(1), rule));
  p.r4 = integral_map_history(P4, Vec::Zero(4), WeightedSpace::euclidean(1), rule);
  p.sample_scale = 1.0;
  return p;
}

AbstractProblem make_random_instance(int dim, std::uint64_t seed) {
  Rng rng(seed);
  AbstractProblem p;
  p.name = "random-" + std::to_string(dim) + "-" + std::to_string(seed);
  p.dim = dim;
  p.metric = std::make_shared<EnergyMetric>(EnergyMetric::identity(dim));
  Vec bound(1);
  std::uniform_real_distribution<double> U(0.2, 1.0);
  bound << U(rng);
  p.constraint = ConstraintSet::nodewise({0}, bound);

  // SPD operator via a random orthogonal frame and eigenvalues in [1, 3].
  Mat Q(dim, dim);
  for (Eigen::Index i = 0; i < Q.cols(); ++i) Q.col(i) = gaussian_vec(rng, dim);
  for (Eigen::Index i = 0; i < Q.cols(); ++i) {
    for (Eigen::Index k = 0; k < i; ++k) Q.col(i) -= Q.col(k).dot(Q.col(i)) * Q.col(k);
    Q.col(i).normalize();
  }
  Vec eigs(dim);
  for (int i = 0; i < dim; ++i) eigs[i] = 1.0 + 2.0 * U(rng);
  Mat K = Q * eigs.asDiagonal() * Q.transpose();
  K = 0.5 * (K + K.transpose()).eval();

  const int xdim = std::max(1, dim / 2);
  Mat Mmat(xdim, dim);
  for (int i = 0; i < xdim; ++i) Mmat.row(i) = 0.5 * gaussian_vec(rng, dim).transpose();
  p.trace = std::make_shared<TraceOperator>(Mmat, Vec::Ones(xdim));
  p.e_space = WeightedSpace::euclidean(dim);
  p.y_space = WeightedSpace::euclidean(1);
  p.z_space = WeightedSpace::euclidean(1);

  Vec b = gaussian_vec(rng, dim, 1.0);
  p.A = [K](double, const Vec& lambda, const Vec& v) -> Vec { return K * v + lambda; };
  p.f = [b](double, const Vec&) -> Vec { return b; };

  const double l1c = 0.1 + 0.2 * U(rng);
  const ConstraintSet k = p.constraint;
  p.phi.value_diff = [l1c](double, const Vec&, const Vec&, const Vec& v1, const Vec& v2) {
    return l1c * (v1.lpNorm<1>() - v2.lpNorm<1>());
  };
  p.phi.prox = [l1c, k](double, const Vec&, const Vec&, const Vec& x, double rho) -> Vec {
    Vec y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double t = rho * l1c;
      y[i] = x[i] > t ? x[i] - t : (x[i] < -t ? x[i] + t : 0.0);
    }
    return k.project(y);
  };

  Eigen::SelfAdjointEigenSolver<Mat> es(K);
  const double m_A = es.eigenvalues().minCoeff();
  const double mnorm = estimate_operator_norm(*p.trace, *p.metric).estimate;
  const double alpha0 = 0.2 * m_A / std::max(mnorm * mnorm, 1e-6);

  PrototypePotential proto;
  proto.alpha = [alpha0](double, const Vec&) { return alpha0; };
  proto.alpha0 = alpha0;
  proto.g = default_normal_damper_law();
  proto.weights = Vec::Ones(xdim);
  p.j = proto.as_potential();

  HypothesisConstants c;
  c.m_A = m_A;
  c.mbar_A = 1.0;
  c.a1 = 1.0;
  c.a2 = es.eigenvalues().maxCoeff();
  c.c0j_max = alpha0 * 2.0 * std::sqrt(static_cast<double>(xdim));
  c.m_j = alpha0;
  c.M_norm = mnorm;
  p.constants = c;
  const double slope = l1c * std::sqrt(static_cast<double>(dim));
  p.phi_lip = [slope](double, double, double) { return slope; };

  p.r1 = zero_history(dim);
  p.r2 = zero_history(xdim);
  p.r3 = zero_history(1);
  p.r4 = zero_history(1);
  p.sample_scale = 1.0;
  return p;
}

std::vector<std::string> toy_names() {
  std::vector<std::string> names;
  for (const auto& fi : frozen_oracle_instances()) names.push_back(fi.name);
  names.push_back("scalar-ode");
  names.push_back("dim4-full");
  return names;
}

}  // namespace vhi
