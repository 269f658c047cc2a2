#include "vhi/evolution.hpp"

#include <cmath>

namespace vhi {

std::vector<double> EvolutionReport::contraction_ratios() const {
  std::vector<double> r;
  for (std::size_t i = 1; i < picard_residuals.size(); ++i) {
    if (picard_residuals[i - 1] == 0.0) break;
    r.push_back(picard_residuals[i] / picard_residuals[i - 1]);
  }
  return r;
}

FrozenData frozen_states(const AbstractProblem& p, const Trajectory& w, int n) {
  FrozenData d;
  d.t = w.grid.node(n);
  d.lambda = p.r1->eval(w, n);
  d.xi = p.r2->eval(w, n);
  d.eta = p.r3->eval(w, n);
  d.zeta = p.r4->eval(w, n);
  return d;
}

namespace {

void require_margin(const AbstractProblem& p, const char* who) {
  const double m = p.margin();
  if (!(m > 0.0))
    throw SmallnessError(m, std::string(who) + ": refusing to run, smallness margin = " +
                                fmt_g17(m));
}

NodeStats stats_of(const FrozenResult& r) {
  return NodeStats{r.inner_iterations, r.outer_iterations, r.residual};
}

}  // namespace

EvolutionReport time_march(const AbstractProblem& p, const EvolutionConfig& cfg) {
  require_margin(p, "time_march");
  EvolutionReport rep;
  rep.trajectory = Trajectory(cfg.grid, p.dim);
  rep.node_stats.resize(static_cast<std::size_t>(cfg.grid.count()));
  Trajectory& w = rep.trajectory;

  for (int n = 0; n <= cfg.grid.N; ++n) {
    const Vec warm = n > 0 ? w.at(n - 1) : p.constraint.project(Vec::Zero(p.dim));
    try {
      if (cfg.rule == QuadratureRule::LeftRectangle) {
        FrozenData d = frozen_states(p, w, n);
        FrozenResult r = solve_frozen(p, d, cfg.frozen, &warm);
        w.at(n) = r.w;
        rep.node_stats[static_cast<std::size_t>(n)] = stats_of(r);
      } else {
        // Trapezoid couples node n to its own history; resolve by a small
        // fixed point on the node value.
        Vec guess = warm;
        bool done = false;
        std::vector<double> diffs;
        for (int sweep = 0; sweep < cfg.trapezoid_max_sweeps; ++sweep) {
          w.at(n) = guess;
          FrozenData d = frozen_states(p, w, n);
          FrozenResult r = solve_frozen(p, d, cfg.frozen, &guess);
          const double diff = p.metric->norm(r.w - guess);
          diffs.push_back(diff);
          guess = r.w;
          rep.node_stats[static_cast<std::size_t>(n)] = stats_of(r);
          if (diff <= cfg.frozen.inner_tol) {
            done = true;
            break;
          }
        }
        if (!done)
          throw ConvergenceError("implicit node fixed point stalled", diffs);
        w.at(n) = guess;
      }
    } catch (const SmallnessError&) {
      throw;
    } catch (const Error& e) {
      throw ConvergenceError("time_march: node " + std::to_string(n) + " (t = " +
                                 fmt_g17(cfg.grid.node(n)) + "): " + e.what(),
                             {});
    }
  }
  rep.converged = true;
  return rep;
}

EvolutionReport picard_global(const AbstractProblem& p, const EvolutionConfig& cfg,
                              const Trajectory& init) {
  require_margin(p, "picard_global");
  if (init.grid.N != cfg.grid.N) throw DimensionError("picard_global: init grid mismatch");

  EvolutionReport rep;
  rep.node_stats.resize(static_cast<std::size_t>(cfg.grid.count()));
  Trajectory w = init;
  for (auto& s : w.samples) s = p.constraint.project(s);

  std::vector<Vec> prev_states;
  for (int sweep = 1; sweep <= cfg.max_picard; ++sweep) {
    rep.sweeps = sweep;
    // Freeze Lambda(w): all history states along the current trajectory.
    auto l1 = p.r1->eval_all(w);
    auto l2 = p.r2->eval_all(w);
    auto l3 = p.r3->eval_all(w);
    auto l4 = p.r4->eval_all(w);

    if (!prev_states.empty()) {
      // Successive difference of the Lambda image in L2(0,T; E x X x Y x Z).
      double acc = 0.0;
      for (int n = 0; n <= cfg.grid.N; ++n) {
        const double q = quad_weight(cfg.grid, cfg.rule, cfg.grid.N, n);
        if (q == 0.0) continue;
        const std::size_t sn = static_cast<std::size_t>(n);
        const Vec& prev = prev_states[sn];
        Eigen::Index o = 0;
        const Vec d1 = l1[sn] - prev.segment(o, l1[sn].size());
        o += l1[sn].size();
        const Vec d2 = l2[sn] - prev.segment(o, l2[sn].size());
        o += l2[sn].size();
        const Vec d3 = l3[sn] - prev.segment(o, l3[sn].size());
        o += l3[sn].size();
        const Vec d4 = l4[sn] - prev.segment(o, l4[sn].size());
        acc += q * (p.e_space.inner(d1, d1) + p.x_space().inner(d2, d2) +
                    p.y_space.inner(d3, d3) + p.z_space.inner(d4, d4));
      }
      rep.state_residuals.push_back(std::sqrt(acc));
    }
    prev_states.resize(static_cast<std::size_t>(cfg.grid.count()));
    for (int n = 0; n <= cfg.grid.N; ++n) {
      const std::size_t sn = static_cast<std::size_t>(n);
      Vec cur(l1[sn].size() + l2[sn].size() + l3[sn].size() + l4[sn].size());
      cur << l1[sn], l2[sn], l3[sn], l4[sn];
      prev_states[sn] = std::move(cur);
    }

    Trajectory w_next = w;
    for (int n = 0; n <= cfg.grid.N; ++n) {
      FrozenData d;
      d.t = cfg.grid.node(n);
      d.lambda = l1[static_cast<std::size_t>(n)];
      d.xi = l2[static_cast<std::size_t>(n)];
      d.eta = l3[static_cast<std::size_t>(n)];
      d.zeta = l4[static_cast<std::size_t>(n)];
      const Vec warm = w.at(n);
      try {
        FrozenResult r = solve_frozen(p, d, cfg.frozen, &warm);
        w_next.at(n) = r.w;
        rep.node_stats[static_cast<std::size_t>(n)] = stats_of(r);
      } catch (const SmallnessError&) {
        throw;
      } catch (const Error& e) {
        throw ConvergenceError("picard_global: sweep " + std::to_string(sweep) + ", node " +
                                   std::to_string(n) + ": " + e.what(),
                               rep.picard_residuals);
      }
    }

    const double delta = traj_l2_distance(w_next, w, *p.metric, cfg.rule);
    rep.picard_residuals.push_back(delta);
    w = std::move(w_next);
    if (delta <= cfg.picard_tol) {
      rep.trajectory = std::move(w);
      rep.converged = true;
      return rep;
    }
  }
  throw ConvergenceError("picard_global: no convergence in " + std::to_string(cfg.max_picard) +
                             " sweeps (last residual " + fmt_g17(rep.picard_residuals.back()) +
                             ")",
                         rep.picard_residuals);
}

StatePerturbation StatePerturbation::zero(const AbstractProblem& p, const TimeGrid& grid) {
  StatePerturbation d;
  const int m = grid.count();
  d.dlambda.assign(m, Vec::Zero(p.e_space.dim()));
  d.dxi.assign(m, Vec::Zero(p.x_space().dim()));
  d.deta.assign(m, Vec::Zero(p.y_space.dim()));
  d.dzeta.assign(m, Vec::Zero(p.z_space.dim()));
  return d;
}

StatePerturbation StatePerturbation::random(const AbstractProblem& p, const TimeGrid& grid,
                                            double scale, std::uint64_t seed) {
  Rng rng(seed);
  StatePerturbation d;
  const int m = grid.count();
  d.dlambda.reserve(m);
  d.dxi.reserve(m);
  d.deta.reserve(m);
  d.dzeta.reserve(m);
  for (int n = 0; n < m; ++n) {
    d.dlambda.push_back(gaussian_vec(rng, p.e_space.dim(), scale));
    d.dxi.push_back(gaussian_vec(rng, p.x_space().dim(), scale));
    d.deta.push_back(gaussian_vec(rng, p.y_space.dim(), scale));
    d.dzeta.push_back(gaussian_vec(rng, p.z_space.dim(), scale));
  }
  return d;
}

StatePerturbation StatePerturbation::scaled(double s) const {
  StatePerturbation d = *this;
  for (auto& v : d.dlambda) v *= s;
  for (auto& v : d.dxi) v *= s;
  for (auto& v : d.deta) v *= s;
  for (auto& v : d.dzeta) v *= s;
  return d;
}

bool StatePerturbation::is_zero() const {
  auto allz = [](const std::vector<Vec>& vs) {
    for (const auto& v : vs)
      if (v.size() > 0 && v.cwiseAbs().maxCoeff() > 0.0) return false;
    return true;
  };
  return allz(dlambda) && allz(dxi) && allz(deta) && allz(dzeta);
}

StabilityReport stability_ratio(const AbstractProblem& p, const EvolutionConfig& cfg,
                                const StatePerturbation& perturb) {
  require_margin(p, "stability_ratio");
  StabilityReport rep;
  if (perturb.is_zero()) {
    rep.skipped = true;
    rep.pass = true;
    return rep;
  }

  // Base states from the causal solution of the instance itself.
  EvolutionReport base_run = time_march(p, cfg);
  const Trajectory& wb = base_run.trajectory;
  auto l1 = p.r1->eval_all(wb);
  auto l2 = p.r2->eval_all(wb);
  auto l3 = p.r3->eval_all(wb);
  auto l4 = p.r4->eval_all(wb);

  const int N = cfg.grid.N;
  std::vector<Vec> w1(static_cast<std::size_t>(N + 1)), w2(static_cast<std::size_t>(N + 1));
  for (int n = 0; n <= N; ++n) {
    FrozenData d;
    d.t = cfg.grid.node(n);
    d.lambda = l1[static_cast<std::size_t>(n)];
    d.xi = l2[static_cast<std::size_t>(n)];
    d.eta = l3[static_cast<std::size_t>(n)];
    d.zeta = l4[static_cast<std::size_t>(n)];
    const Vec warm = wb.at(n);
    w1[static_cast<std::size_t>(n)] = solve_frozen(p, d, cfg.frozen, &warm).w;
    FrozenData dp = d;
    dp.lambda += perturb.dlambda[static_cast<std::size_t>(n)];
    dp.xi += perturb.dxi[static_cast<std::size_t>(n)];
    dp.eta += perturb.deta[static_cast<std::size_t>(n)];
    dp.zeta += perturb.dzeta[static_cast<std::size_t>(n)];
    w2[static_cast<std::size_t>(n)] = solve_frozen(p, dp, cfg.frozen, &warm).w;
  }

  const HypothesisConstants& c = p.constants;
  const double margin = smallness_margin(c);
  rep.pass = true;
  for (int n = 0; n <= N; ++n) {
    double lhs2 = 0.0, dl2 = 0.0, dxi2 = 0.0, deta2 = 0.0, dzeta2 = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double q = quad_weight(cfg.grid, cfg.rule, n, k);
      if (q == 0.0) continue;
      const std::size_t sk = static_cast<std::size_t>(k);
      const double dw = p.metric->norm(w1[sk] - w2[sk]);
      lhs2 += q * dw * dw;
      const double a = p.e_space.norm(perturb.dlambda[sk]);
      const double b = p.x_space().norm(perturb.dxi[sk]);
      const double e = p.y_space.norm(perturb.deta[sk]);
      const double z = p.z_space.norm(perturb.dzeta[sk]);
      dl2 += q * a * a;
      dxi2 += q * b * b;
      deta2 += q * e * e;
      dzeta2 += q * z * z;
    }
    const double lhs = std::sqrt(lhs2);
    const double rhs = (c.mbar_A * std::sqrt(dl2) + c.L_f * std::sqrt(dxi2) +
                        c.beta_phi * std::sqrt(deta2) + c.m_1 * c.M_norm * std::sqrt(dzeta2)) /
                       margin;
    if (rhs > 0.0) rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
    if (lhs > rhs * (1.0 + 1e-12) + 1e-12) rep.pass = false;
    if (n == N) {
      rep.lhs = lhs;
      rep.rhs = rhs;
    }
  }
  return rep;
}

UniquenessReport uniqueness_probe(const AbstractProblem& p, const EvolutionConfig& cfg,
                                  const std::vector<Trajectory>& inits) {
  if (inits.size() < 2) throw Error("usage", "uniqueness_probe: need at least 2 inits");
  UniquenessReport rep;
  for (const auto& init : inits) rep.runs.push_back(picard_global(p, cfg, init));
  for (std::size_t i = 0; i < rep.runs.size(); ++i)
    for (std::size_t k = i + 1; k < rep.runs.size(); ++k)
      rep.max_distance = std::max(
          rep.max_distance, traj_l2_distance(rep.runs[i].trajectory, rep.runs[k].trajectory,
                                             *p.metric, cfg.rule));
  return rep;
}

}  // namespace vhi
