#include "vhi/elliptic.hpp"

#include <algorithm>
#include <cmath>

namespace vhi {

FrozenData FrozenData::zero(const AbstractProblem& p, double t) {
  FrozenData d;
  d.t = t;
  d.lambda = Vec::Zero(p.e_space.dim());
  d.xi = Vec::Zero(p.x_space().dim());
  d.eta = Vec::Zero(p.y_space.dim());
  d.zeta = Vec::Zero(p.z_space.dim());
  return d;
}

namespace {

double sample_step(const AbstractProblem& p, const FrozenData& d) {
  // Euclidean Lipschitz estimate of the forward map
  // v -> A(t,lambda,v) + M* z(Mv) on deterministic probe pairs at the problem
  // scale; the step 1/L is halved later on divergence or stall.
  Rng rng(0x5eed5eedULL);
  const double s = std::max(p.sample_scale, 1e-8);
  const TraceOperator& M = *p.trace;
  auto fwd = [&](const Vec& v) -> Vec {
    return p.A(d.t, d.lambda, v) + M.apply_adjoint(p.j.subgrad_select(d.t, d.zeta, M.apply(v)));
  };
  double lip = 0.0;
  Vec base = Vec::Zero(p.dim);
  Vec f0 = fwd(base);
  for (int k = 0; k < 16; ++k) {
    Vec v1 = gaussian_vec(rng, p.dim, k % 4 == 1 ? 0.1 * s : s);
    Vec v2 = (k % 3 == 0) ? base : Vec(gaussian_vec(rng, p.dim, s));
    double dv = (v1 - v2).norm();
    if (dv == 0.0) continue;
    Vec r1 = fwd(v1);
    Vec r2 = (k % 3 == 0) ? f0 : Vec(fwd(v2));
    lip = std::max(lip, (r1 - r2).norm() / dv);
  }
  if (lip <= 0.0) return 1.0;
  return 1.0 / lip;
}

}  // namespace

FrozenResult solve_frozen(const AbstractProblem& p, const FrozenData& d, const SolveConfig& cfg,
                          const Vec* warm) {
  const double margin = p.margin();
  if (!(margin > 0.0))
    throw SmallnessError(margin, "solve_frozen: smallness condition violated, margin = " +
                                     fmt_g17(margin) + " (m_A = " + fmt_g17(p.constants.m_A) +
                                     ", m_j|M|^2 + alpha_phi = " +
                                     fmt_g17(p.constants.m_A - margin) + ")");

  const TraceOperator& M = *p.trace;
  double rho = cfg.rho > 0.0 ? cfg.rho : sample_step(p, d);

  Vec w = warm ? p.constraint.project(*warm) : p.constraint.project(Vec::Zero(p.dim));

  FrozenResult res;
  res.rho_used = rho;
  std::vector<double> inner_history;
  int halvings = 0;
  int total_inner = 0;

  // The subgradient selection rides inside the forward map: under (H_0) the
  // combined map A + M* dj(M .) is monotone, so the forward-backward step
  // contracts once rho is small enough. The outer loop only refreshes phi's
  // quasi slot. The load vector and the history slots of A are folded once.
  const Vec fv = p.f(d.t, d.xi);
  std::function<Vec(const Vec&)> Av;
  if (p.A_bind) {
    Av = p.A_bind(d.t, d.lambda);
  } else {
    Av = [&p, &d](const Vec& x) { return p.A(d.t, d.lambda, x); };
  }
  auto fb_step = [&](const Vec& x, const Vec& anchor) {
    Vec z = p.j.subgrad_select(d.t, d.zeta, M.apply(x));
    Vec grad = Av(x) - fv + M.apply_adjoint(z);
    return p.phi.prox(d.t, d.eta, anchor, x - rho * grad, rho);
  };
  auto self_residual = [&](const Vec& x) { return (x - fb_step(x, x)).norm(); };

  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    res.outer_iterations = outer;
    const Vec anchor = w;  // phi's quasi slot frozen at the sweep anchor

    // Momentum-accelerated forward-backward with restart on residual growth;
    // the sweep only terminates on the plain fixed-point residual, so the
    // acceleration cannot weaken the exit certificate.
    double best = std::numeric_limits<double>::infinity();
    Vec best_w = w;
    Vec y = w;
    Vec w_prev = w;
    double tk = 1.0;
    double prev_r = -1.0;
    double rate = 0.0;
    int since_best = 0;
    while (true) {
      if (total_inner >= cfg.max_inner)
        throw ConvergenceError(
            "solve_frozen: inner budget " + std::to_string(cfg.max_inner) +
                " exhausted (outer sweep " + std::to_string(outer) + ", last residual " +
                fmt_g17(inner_history.empty() ? -1.0 : inner_history.back()) + ")",
            inner_history);
      Vec w_next = fb_step(y, anchor);
      ++total_inner;
      const double r = (y - w_next).norm();
      inner_history.push_back(r);
      const bool diverging =
          r > cfg.divergence_factor * std::max(best, 1e-300) && r > cfg.inner_tol;
      const bool stalled = since_best > 1000 && r > cfg.inner_tol;
      if (diverging || stalled) {
        // Halve the step and restart the sweep from the best iterate.
        rho *= 0.5;
        res.rho_used = rho;
        ++halvings;
        if (halvings > 60)
          throw StepSizeError(rho, "solve_frozen: residual keeps growing after 60 step "
                                   "halvings; supply a smaller rho");
        w = best_w;
        y = w;
        w_prev = w;
        tk = 1.0;
        prev_r = -1.0;
        best = std::numeric_limits<double>::infinity();
        since_best = 0;
        continue;
      }
      if (prev_r > 0.0 && r > 0.0) {
        const double q = std::clamp(r / prev_r, 0.0, 0.999);
        rate = rate == 0.0 ? q : 0.7 * rate + 0.3 * q;
      }
      if (r < best) {
        best = r;
        best_w = w_next;
        since_best = 0;
      } else {
        ++since_best;
      }
      // Aim past the raw tolerance so the returned point is within inner_tol
      // of the sweep fixed point, not merely a small momentum step away.
      const double target = cfg.inner_tol * std::clamp(1.0 - rate, 1e-3, 1.0);
      if (r <= target) {
        const double rc = (w_next - fb_step(w_next, anchor)).norm();
        ++total_inner;
        inner_history.push_back(rc);
        if (rc <= target) {
          w = std::move(w_next);
          break;
        }
      }
      if (prev_r > 0.0 && r > prev_r) {
        // Momentum overshoot: restart from the new point.
        tk = 1.0;
        y = w_next;
      } else {
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        y = w_next + ((tk - 1.0) / t_next) * (w_next - w_prev);
        tk = t_next;
      }
      prev_r = r;
      w_prev = std::move(w_next);
      w = w_prev;
    }
    res.inner_iterations = total_inner;

    const double outer_diff = p.metric->norm(w - anchor);
    res.outer_history.push_back(outer_diff);
    if (outer_diff <= cfg.outer_tol) {
      res.residual = self_residual(w);
      if (res.residual <= cfg.inner_tol) {
        res.w = std::move(w);
        return res;
      }
    }
  }
  throw ConvergenceError("solve_frozen: outer loop did not converge in " +
                             std::to_string(cfg.max_outer) + " sweeps (last difference " +
                             fmt_g17(res.outer_history.back()) + ")",
                         res.outer_history);
}

MintyReport minty_residual(const AbstractProblem& p, const FrozenData& d, const Vec& w,
                           const std::vector<Vec>& probes) {
  if (!p.constraint.is_feasible(w, 0.0))
    throw Error("feasibility", "minty_residual: w is not feasible");
  const TraceOperator& M = *p.trace;
  const Vec fw = p.f(d.t, d.xi);
  const Vec mw = M.apply(w);
  MintyReport rep;
  rep.min_value = std::numeric_limits<double>::infinity();
  int idx = 0;
  for (const Vec& v : probes) {
    if (!p.constraint.is_feasible(v, 0.0))
      throw Error("feasibility", "minty_residual: probe " + std::to_string(idx) + " infeasible");
    const Vec mv = M.apply(v);
    const double val = (p.A(d.t, d.lambda, v) - fw).dot(v - w) +
                       p.phi.value_diff(d.t, d.eta, w, v, w) +
                       p.j.dir_deriv(d.t, d.zeta, mv, mv - mw);
    if (val < rep.min_value) {
      rep.min_value = val;
      rep.worst_probe = idx;
      rep.worst_probe_vec = v;
    }
    ++idx;
  }
  if (probes.empty()) rep.min_value = 0.0;
  return rep;
}

std::vector<Vec> make_minty_probes(const AbstractProblem& p, const Vec& w, int count,
                                   std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec> probes;
  probes.reserve(static_cast<std::size_t>(count));
  const double base = 1.0 + p.metric->norm(w);
  const double radii[3] = {0.05 * base, 0.3 * base, 1.5 * base};
  const int corners = p.constraint.kind() == ConstraintSet::Kind::WholeSpace ? 0 : count / 4;
  std::uniform_int_distribution<int> pick(0, 1);
  for (int i = 0; i < count; ++i) {
    if (i < corners) {
      // Constraint-active corner: clamp a random subset of constrained
      // indices onto the bound.
      Vec v = w + gaussian_vec(rng, p.dim, 0.1 * base / std::sqrt(double(p.dim)));
      const auto& idxs = p.constraint.indices();
      for (std::size_t k = 0; k < idxs.size(); ++k)
        if (pick(rng) == 1)
          v[idxs[k]] = p.constraint.sign()[static_cast<Eigen::Index>(k)] *
                       p.constraint.bound()[static_cast<Eigen::Index>(k)];
      probes.push_back(p.constraint.project(v));
    } else {
      const double r = radii[i % 3];
      probes.push_back(p.constraint.project(w + gaussian_vec(rng, p.dim, r / std::sqrt(double(p.dim)))));
    }
  }
  return probes;
}

AprioriReport apriori_bound_check(const AbstractProblem& p, const FrozenData& d, const Vec& w,
                                  const Vec& v0, const Vec& z0, const Vec& xi0) {
  if (!p.constraint.is_feasible(v0, 0.0))
    throw Error("feasibility", "apriori_bound_check: v0 not feasible");
  const HypothesisConstants& c = p.constants;
  const double margin = smallness_margin(c);
  const double v0n = p.metric->norm(v0);
  const double phi_slope = p.phi_lip ? p.phi_lip(d.t, p.y_space.norm(d.eta), p.metric->norm(z0))
                                     : 0.0;
  AprioriReport rep;
  rep.lhs = margin * p.metric->norm(w - v0);
  rep.rhs = c.a0_max + c.a1 * p.e_space.norm(d.lambda) + c.a2 * v0n +
            p.metric->dual_norm(p.f(d.t, xi0)) + c.L_f * p.x_space().norm(xi0) +
            c.L_f * p.x_space().norm(d.xi) +
            c.M_norm * (c.c0j_max + c.c1j * p.z_space.norm(d.zeta) + c.c2j * c.M_norm * v0n) +
            phi_slope + c.alpha_phi * p.metric->norm(v0 - z0);
  rep.pass = rep.lhs <= rep.rhs * (1.0 + 1e-12) + 1e-12;
  return rep;
}

}  // namespace vhi
