#include "vhi/audit.hpp"

#include <cmath>

namespace vhi {

namespace {

struct Sampler {
  Rng rng;
  const AbstractProblem& p;
  double radii[3];

  Sampler(const AbstractProblem& prob, std::uint64_t seed) : rng(seed), p(prob) {
    radii[0] = 0.1 * p.sample_scale;
    radii[1] = 1.0 * p.sample_scale;
    radii[2] = 10.0 * p.sample_scale;
  }

  double t() {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    return U(rng);
  }
  Vec v(int i, bool clamp_boundary) {
    Vec x = gaussian_vec(rng, p.dim, radii[i % 3]);
    if (clamp_boundary && p.constraint.kind() != ConstraintSet::Kind::WholeSpace) {
      std::uniform_int_distribution<int> pick(0, 1);
      const auto& idx = p.constraint.indices();
      for (std::size_t k = 0; k < idx.size(); ++k)
        if (pick(rng))
          x[idx[k]] = p.constraint.sign()[static_cast<Eigen::Index>(k)] *
                      p.constraint.bound()[static_cast<Eigen::Index>(k)];
    }
    return x;
  }
  Vec state(int i, Eigen::Index dim) { return gaussian_vec(rng, dim, radii[i % 3]); }
};

// Slack of H(A)(d) for one tuple, normalized by the term magnitudes.
double slack_operator_A(const AbstractProblem& p, double t, const Vec& l1, const Vec& l2,
                        const Vec& v1, const Vec& v2) {
  const double dv = p.metric->norm(v1 - v2);
  const double dl = p.e_space.norm(l1 - l2);
  const double lhs = (p.A(t, l1, v1) - p.A(t, l2, v2)).dot(v1 - v2);
  const double rhs = p.constants.m_A * dv * dv - p.constants.mbar_A * dl * dv;
  const double scale = std::abs(lhs) + p.constants.m_A * dv * dv +
                       p.constants.mbar_A * dl * dv + 1.0;
  return (lhs - rhs) / scale;
}

double slack_multivalued(const AbstractProblem& p, double t, const Vec& l, const Vec& zeta,
                         const Vec& v1, const Vec& v2) {
  const TraceOperator& M = *p.trace;
  const Vec z1 = p.j.subgrad_select(t, zeta, M.apply(v1));
  const Vec z2 = p.j.subgrad_select(t, zeta, M.apply(v2));
  const double lhs = (p.A(t, l, v1) + M.apply_adjoint(z1) - p.A(t, l, v2) - M.apply_adjoint(z2))
                         .dot(v1 - v2);
  const double scale = std::abs(lhs) + 1.0;
  return lhs / scale;
}

double slack_phi(const AbstractProblem& p, double t, const Vec& e1, const Vec& e2, const Vec& w1,
                 const Vec& w2, const Vec& v1, const Vec& v2) {
  const double delta =
      p.phi.value_diff(t, e1, w1, v2, v1) + p.phi.value_diff(t, e2, w2, v1, v2);
  const double bound = p.constants.alpha_phi * p.metric->norm(w1 - w2) * p.metric->norm(v1 - v2) +
                       p.constants.beta_phi * p.y_space.norm(e1 - e2) * p.metric->norm(v1 - v2);
  const double scale = std::abs(delta) + bound + 1.0;
  return (bound - delta) / scale;
}

double slack_subgrad_growth(const AbstractProblem& p, double t, const Vec& zeta, const Vec& x) {
  const Vec s = p.j.subgrad_select(t, zeta, x);
  const double lhs = p.x_space().norm(s);
  const double rhs = p.constants.c0j_max + p.constants.c1j * p.z_space.norm(zeta) +
                     p.constants.c2j * p.x_space().norm(x);
  const double scale = lhs + rhs + 1.0;
  return (rhs - lhs) / scale;
}

constexpr double kTol = 1e-10;

}  // namespace

AuditEntry audit_operator_A(const AbstractProblem& p, int samples, std::uint64_t seed) {
  if (samples < 1) throw Error("audit", "audit_operator_A: samples >= 1");
  AuditEntry e;
  e.name = "H_A_monotonicity";
  e.claimed = p.constants.m_A;
  e.seed = seed;
  e.samples = samples;
  Sampler s(p, seed);
  e.worst_slack = std::numeric_limits<double>::infinity();
  double m_est = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (int i = 0; i < samples; ++i) {
    const double t = s.t();
    const Vec v1 = s.v(i, i % 5 == 0);
    const Vec v2 = s.v(i + 1, i % 7 == 0);
    Vec l1 = s.state(i, p.e_space.dim());
    Vec l2 = (i % 2 == 0) ? l1 : Vec(s.state(i + 2, p.e_space.dim()));
    const double sl = slack_operator_A(p, t, l1, l2, v1, v2);
    if (sl < e.worst_slack) {
      e.worst_slack = sl;
      if (sl < -kTol) {
        ok = false;
        e.witness_t = t;
        e.witness = {l1, l2, v1, v2};
      }
    }
    if (i % 2 == 0) {
      const double dv = p.metric->norm(v1 - v2);
      if (dv > 0.0)
        m_est = std::min(m_est, (p.A(t, l1, v1) - p.A(t, l1, v2)).dot(v1 - v2) / (dv * dv));
    }
  }
  e.estimate = m_est;
  e.pass = ok && e.claimed <= m_est * (1.0 + 1e-9) + 1e-12;
  e.note = "sampled strong-monotonicity estimate; stored m_A must not exceed it";
  return e;
}

AuditEntry audit_multivalued_monotone(const AbstractProblem& p, int samples, std::uint64_t seed) {
  AuditEntry e;
  e.name = "multivalued_monotonicity";
  e.claimed = 0.0;
  e.seed = seed;
  e.samples = samples;
  Sampler s(p, seed + 1);
  e.worst_slack = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (int i = 0; i < samples; ++i) {
    const double t = s.t();
    const Vec l = s.state(i, p.e_space.dim());
    const Vec zeta = s.state(i + 1, p.z_space.dim());
    const Vec v1 = s.v(i, i % 4 == 0);
    const Vec v2 = s.v(i + 1, i % 6 == 0);
    const double sl = slack_multivalued(p, t, l, zeta, v1, v2);
    if (sl < e.worst_slack) {
      e.worst_slack = sl;
      if (sl < -kTol) {
        ok = false;
        e.witness_t = t;
        e.witness = {l, zeta, v1, v2};
      }
    }
  }
  e.estimate = e.worst_slack;
  e.pass = ok;
  e.note = "A + M* dj(M .) monotone under (H_0)";
  return e;
}

AuditEntry audit_contact_smallness(const ContactProblem& cp, double safety) {
  AuditEntry e;
  e.name = "contact_smallness_4_11";
  e.claimed = cp.smallness.lhs;
  e.estimate = cp.smallness.rhs;
  e.worst_slack = cp.smallness.rhs - safety * cp.smallness.lhs;
  e.pass = safety * cp.smallness.lhs < cp.smallness.rhs;
  e.note = "k* m_jnu |gamma|^4 + p* L_mu |gamma|^2 < m_A with safety " + fmt_g17(safety) +
           "; margin fraction " + fmt_g17(cp.smallness.margin_fraction);
  return e;
}

AuditEntry audit_potential_phi(const AbstractProblem& p, int samples, std::uint64_t seed) {
  AuditEntry e;
  e.name = "H_phi_four_point";
  e.claimed = p.constants.alpha_phi;
  e.seed = seed;
  e.samples = samples;
  Sampler s(p, seed + 2);
  e.worst_slack = std::numeric_limits<double>::infinity();
  double alpha_est = 0.0;
  bool ok = true;
  for (int i = 0; i < samples; ++i) {
    const double t = s.t();
    Vec e1 = s.state(i, p.y_space.dim());
    Vec e2 = (i % 3 == 0) ? e1 : Vec(s.state(i + 1, p.y_space.dim()));
    const Vec w1 = s.v(i, false);
    const Vec w2 = s.v(i + 1, false);
    const Vec v1 = s.v(i + 2, i % 5 == 0);
    const Vec v2 = s.v(i + 3, false);
    const double sl = slack_phi(p, t, e1, e2, w1, w2, v1, v2);
    if (sl < e.worst_slack) {
      e.worst_slack = sl;
      if (sl < -kTol) {
        ok = false;
        e.witness_t = t;
        e.witness = {e1, e2, w1, w2, v1, v2};
      }
    }
    if (i % 3 == 0) {
      const double dw = p.metric->norm(w1 - w2);
      const double dv = p.metric->norm(v1 - v2);
      if (dw > 0 && dv > 0)
        alpha_est = std::max(alpha_est, (p.phi.value_diff(t, e1, w1, v2, v1) +
                                         p.phi.value_diff(t, e1, w2, v1, v2)) /
                                            (dw * dv));
    }
    // midpoint convexity in the last slot
    const Vec mid = 0.5 * (v1 + v2);
    const double conv = p.phi.value_diff(t, e1, w1, mid, v1) -
                        0.5 * p.phi.value_diff(t, e1, w1, v2, v1);
    const double cscale = std::abs(conv) + 1.0;
    if (conv / cscale > kTol) {
      ok = false;
      e.worst_slack = std::min(e.worst_slack, -conv / cscale);
      e.witness_t = t;
      e.witness = {e1, e1, w1, w1, v1, v2};
      e.note = "midpoint convexity violated";
    }
  }
  e.estimate = alpha_est;
  e.pass = ok;
  if (e.note.empty()) e.note = "four-point inequality and midpoint convexity";
  return e;
}

AuditEntry audit_subgradient_growth(const AbstractProblem& p, int samples, std::uint64_t seed) {
  AuditEntry e;
  e.name = "H_j_subgradient_growth";
  e.claimed = p.constants.c0j_max;
  e.seed = seed;
  e.samples = samples;
  Sampler s(p, seed + 3);
  e.worst_slack = std::numeric_limits<double>::infinity();
  double est = 0.0;
  bool ok = true;
  for (int i = 0; i < samples; ++i) {
    const double t = s.t();
    const Vec zeta = s.state(i, p.z_space.dim());
    const Vec x = s.state(i + 1, p.x_space().dim());
    const double sl = slack_subgrad_growth(p, t, zeta, x);
    est = std::max(est, p.x_space().norm(p.j.subgrad_select(t, zeta, x)));
    if (sl < e.worst_slack) {
      e.worst_slack = sl;
      if (sl < -kTol) {
        ok = false;
        e.witness_t = t;
        e.witness = {zeta, x};
      }
    }
  }
  e.estimate = est;
  e.pass = ok;
  e.note = "selection norm against the growth bound";
  return e;
}

AuditEntry audit_h0_margin(const AbstractProblem& p) {
  AuditEntry e;
  e.name = "H0_smallness_margin";
  e.claimed = p.margin();
  e.estimate = e.claimed;
  e.worst_slack = e.claimed;
  e.pass = e.claimed > 0.0;
  e.note = "m_A - m_j |M|^2 - alpha_phi";
  return e;
}

namespace {

AuditEntry scan_law(const std::string& name, const std::function<double(double, double)>& law,
                    double lo, double hi, double bound_lo, double bound_hi, double lipschitz,
                    const std::vector<double>& ts) {
  AuditEntry e;
  e.name = name;
  e.claimed = lipschitz;
  e.samples = 2001;
  e.worst_slack = std::numeric_limits<double>::infinity();
  double lip_est = 0.0;
  bool ok = true;
  for (double t : ts) {
    double prev_r = 0.0, prev_v = 0.0;
    for (int i = 0; i < e.samples; ++i) {
      const double r = lo + (hi - lo) * i / (e.samples - 1);
      const double v = law(t, r);
      const double range_slack = std::min(v - bound_lo, bound_hi - v);
      if (range_slack < e.worst_slack) e.worst_slack = range_slack;
      if (range_slack < -1e-12) ok = false;
      if (i > 0) {
        const double q = std::abs(v - prev_v) / (r - prev_r);
        lip_est = std::max(lip_est, q);
        if (q > lipschitz * (1.0 + 1e-9) + 1e-12) ok = false;
      }
      prev_r = r;
      prev_v = v;
    }
  }
  e.estimate = lip_est;
  e.pass = ok;
  e.note = "range [" + fmt_g17(bound_lo) + ", " + fmt_g17(bound_hi) + "], Lipschitz <= " +
           fmt_g17(lipschitz);
  return e;
}

}  // namespace

std::vector<AuditEntry> audit_boundary_laws(const BoundaryLaws& laws, double t_max,
                                            double r_range) {
  std::vector<AuditEntry> out;
  const std::vector<double> ts = {0.0, 0.5 * t_max, t_max};
  out.push_back(scan_law("law_Fb", [&](double t, double r) { return laws.Fb(t, r); }, -r_range,
                         r_range, 0.0, laws.Fb_max(), laws.L_Fb(), ts));
  out.push_back(scan_law("law_k", [&](double t, double r) { return laws.k(t, r); }, -r_range,
                         r_range, laws.k1, laws.kstar, laws.L_k(), ts));
  {
    AuditEntry e = scan_law("law_p", [&](double t, double r) { return laws.p(t, r); }, -r_range,
                            r_range, 0.0, laws.pstar, laws.L_p(), ts);
    // p must vanish for negative penetration
    for (double r = -r_range; r < 0.0; r += r_range / 500.0)
      if (laws.p(0.0, r) != 0.0) {
        e.pass = false;
        e.note += "; p(r<0) != 0 at r = " + fmt_g17(r);
        break;
      }
    out.push_back(e);
  }
  out.push_back(scan_law("law_mu", [&](double t, double r) { return laws.mu(t, r); }, 0.0,
                         r_range, 0.0, laws.mu_star(), laws.L_mu(), ts));
  {
    AuditEntry e;
    e.name = "law_jnu_deriv_bound";
    e.claimed = laws.c0bar();
    e.estimate = laws.jnu.deriv_bound();
    e.worst_slack = e.claimed - e.estimate;
    e.pass = e.estimate <= e.claimed * (1.0 + 1e-12);
    e.note = "|beta| bound of the normal damper potential";
    out.push_back(e);
  }
  {
    RelaxedMonotonicityReport rm = scan_relaxed_monotonicity(laws.jnu, -3.0, 3.0, 241,
                                                             laws.m_jnu());
    AuditEntry e;
    e.name = "law_jnu_relaxed_monotonicity";
    e.claimed = laws.m_jnu();
    e.estimate = rm.min_quotient - laws.m_jnu();  // sampled -inf slope
    e.worst_slack = rm.min_quotient;
    e.pass = rm.pass;
    e.note = "dense pair scan on [-3,3]^2; witness (" + fmt_g17(rm.witness_v1) + ", " +
             fmt_g17(rm.witness_v2) + ")";
    out.push_back(e);
  }
  return out;
}

std::vector<AuditEntry> audit_histories(const AbstractProblem& p, const TimeGrid& grid,
                                        int pairs, std::uint64_t seed) {
  std::vector<AuditEntry> out;
  const int N = std::min(grid.N, 16);
  TimeGrid g(grid.T, N);
  Rng rng(seed + 7);
  std::vector<std::pair<Trajectory, Trajectory>> tps;
  for (int i = 0; i < pairs; ++i) {
    Trajectory a(g, p.dim), b(g, p.dim);
    for (int n = 0; n <= N; ++n) {
      a.at(n) = gaussian_vec(rng, p.dim, p.sample_scale);
      b.at(n) = gaussian_vec(rng, p.dim, p.sample_scale);
    }
    tps.emplace_back(std::move(a), std::move(b));
  }
  auto one = [&](const char* name, const HistoryOperator& op, double claimed) {
    HistoryLipschitzReport r = audit_history_lipschitz(op, *p.metric, tps, claimed);
    AuditEntry e;
    e.name = name;
    e.claimed = claimed;
    e.estimate = r.max_quotient;
    e.worst_slack = claimed * (1.0 + 1e-6) - r.max_quotient;
    e.pass = r.pass;
    e.samples = pairs;
    e.seed = seed;
    e.note = "discrete H(R) quotient over random trajectory pairs (N = " + std::to_string(N) +
             "), skipped nodes " + std::to_string(r.skipped_nodes);
    return e;
  };
  out.push_back(one("H_R1_lipschitz", *p.r1, p.constants.c_R1));
  out.push_back(one("H_R3_lipschitz", *p.r3, p.constants.c_R3));
  out.push_back(one("H_R4_lipschitz", *p.r4, p.constants.c_R4));
  return out;
}

AuditReport audit_scenario(const ContactProblem& cp) {
  const ContactScenario& scn = cp.scenario;
  const AbstractProblem& p = cp.abstract;
  AuditReport rep;
  auto laws = audit_boundary_laws(scn.laws, scn.grid.T, 3.0 * scn.audit_scale());
  rep.entries.insert(rep.entries.end(), laws.begin(), laws.end());
  rep.entries.push_back(audit_operator_A(p, scn.audit_samples, scn.audit_seed));
  rep.entries.push_back(audit_multivalued_monotone(p, scn.audit_samples, scn.audit_seed));
  rep.entries.push_back(audit_potential_phi(p, scn.audit_samples, scn.audit_seed));
  rep.entries.push_back(audit_subgradient_growth(p, scn.audit_samples, scn.audit_seed));
  auto hist = audit_histories(p, scn.grid, 5, scn.audit_seed);
  rep.entries.insert(rep.entries.end(), hist.begin(), hist.end());
  rep.entries.push_back(audit_h0_margin(p));
  rep.entries.push_back(audit_contact_smallness(cp, scn.audit_safety));
  rep.h0_margin = p.margin();
  rep.contact_margin_fraction = cp.smallness.margin_fraction;
  return rep;
}

AuditReport audit_abstract(const AbstractProblem& p, const TimeGrid& grid, int samples,
                           std::uint64_t seed) {
  AuditReport rep;
  rep.entries.push_back(audit_operator_A(p, samples, seed));
  rep.entries.push_back(audit_multivalued_monotone(p, samples, seed));
  rep.entries.push_back(audit_potential_phi(p, samples, seed));
  rep.entries.push_back(audit_subgradient_growth(p, samples, seed));
  auto hist = audit_histories(p, grid, 3, seed);
  rep.entries.insert(rep.entries.end(), hist.begin(), hist.end());
  rep.entries.push_back(audit_h0_margin(p));
  rep.h0_margin = p.margin();
  return rep;
}

double replay_witness(const AbstractProblem& p, const AuditEntry& entry) {
  if (entry.name == "H_A_monotonicity" && entry.witness.size() == 4)
    return slack_operator_A(p, entry.witness_t, entry.witness[0], entry.witness[1],
                            entry.witness[2], entry.witness[3]);
  if (entry.name == "multivalued_monotonicity" && entry.witness.size() == 4)
    return slack_multivalued(p, entry.witness_t, entry.witness[0], entry.witness[1],
                             entry.witness[2], entry.witness[3]);
  if (entry.name == "H_phi_four_point" && entry.witness.size() == 6)
    return slack_phi(p, entry.witness_t, entry.witness[0], entry.witness[1], entry.witness[2],
                     entry.witness[3], entry.witness[4], entry.witness[5]);
  if (entry.name == "H_j_subgradient_growth" && entry.witness.size() == 2)
    return slack_subgrad_growth(p, entry.witness_t, entry.witness[0], entry.witness[1]);
  throw Error("audit", "replay_witness: no witness stored for '" + entry.name + "'");
}

}  // namespace vhi
