// Command-line front end: hypothesis audits, contact simulation, and the
// low-dimensional toy instances.

#include "vhi/report_io.hpp"
#include "vhi/toys.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>

namespace {

using namespace vhi;

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

struct SimulateOptions {
  std::string scenario_path;
  std::string mode = "march";
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int halve_dt = 0;
  double tol = -1.0;
  bool audit_only = false;
};

ContactScenario load_with_overrides(const SimulateOptions& opt) {
  ContactScenario scn = load_scenario(opt.scenario_path);
  if (opt.seed_set) scn.audit_seed = opt.seed;
  if (opt.tol > 0.0) {
    scn.solver.inner_tol = opt.tol;
    scn.solver.outer_tol = opt.tol;
    scn.picard_tol = opt.tol;
  }
  return scn;
}

RunManifest make_manifest(const std::string& command, const SimulateOptions& opt) {
  RunManifest m;
  m.command = command;
  m.scenario_path = opt.scenario_path;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(read_file(opt.scenario_path))));
  m.scenario_sha = buf;
  m.seed = opt.seed_set ? opt.seed : 0;
  m.mode = opt.mode;
  m.out_dir = opt.out_dir;
  m.halve_dt = opt.halve_dt;
  m.tol_override = opt.tol;
  return m;
}

int print_audit(const AuditReport& rep) {
  for (const auto& e : rep.entries)
    std::cout << (e.pass ? "PASS " : "FAIL ") << e.name << "  claimed=" << fmt_g17(e.claimed)
              << " estimate=" << fmt_g17(e.estimate) << "\n";
  std::cout << (rep.all_pass() ? "AUDIT PASS" : "AUDIT FAIL")
            << "  h0_margin=" << fmt_g17(rep.h0_margin)
            << " contact_margin_fraction=" << fmt_g17(rep.contact_margin_fraction) << "\n";
  return rep.all_pass() ? kExitOk : kExitNumerical;
}

int cmd_audit(const SimulateOptions& opt) {
  ContactScenario scn = load_with_overrides(opt);
  write_manifest(make_manifest("audit", opt), opt.out_dir);
  ContactProblem cp = build_abstract(scn);
  AuditReport rep = audit_scenario(cp);
  write_audit_report(rep, opt.out_dir);
  return print_audit(rep);
}

void write_solution_csv(const std::string& path, const ContactProblem& cp,
                        const EvolutionReport& run) {
  const ContactAssembly& as = cp.assembly;
  const RectMesh& mesh = cp.mesh;
  const Trajectory& w = run.trajectory;
  ComplementarityReport comp = complementarity_report(cp, run);

  std::map<std::pair<int, int>, const ComplementarityRow*> comp_at;
  for (const auto& row : comp.rows) comp_at[{row.time_index, row.node}] = &row;

  CsvWriter csv(path, "vhisolve.sim.v1",
                {"time_index", "time", "node", "x", "y", "ux", "uy", "vx", "vy", "on_g3",
                 "on_g4", "vn_minus_g", "sigma_n", "sigma_t1", "sigma_t2", "eta", "slip"});
  for (int n = 0; n <= w.grid.N; ++n) {
    const double t = w.grid.node(n);
    const Vec u = integrate_displacement(w, n, as.u0, cp.scenario.rule);
    for (int node = 0; node < mesh.n_nodes(); ++node) {
      const Vec uv = as.node_values(u, node);
      const Vec vv = as.node_values(w.at(n), node);
      const auto it = comp_at.find({n, node});
      double vng = 0, sn = 0, st1 = 0, st2 = 0, eta = 0, slip = 0;
      int g3 = 0, g4 = 0;
      if (it != comp_at.end()) {
        const ComplementarityRow& r = *it->second;
        g3 = r.on_g3;
        g4 = r.on_g4;
        vng = r.vn_minus_g;
        sn = r.sigma_n;
        eta = r.eta;
        slip = r.slip;
        // tangential traction vector from the scalar row data and the frame
        for (const auto& cn : as.cnodes)
          if (cn.node == node) {
            const Eigen::Vector2d tv = r.tau_norm * cn.tau;
            st1 = tv.x();
            st2 = tv.y();
            break;
          }
      }
      csv.row({std::to_string(n), CsvWriter::num(t), std::to_string(node),
               CsvWriter::num(mesh.coords[static_cast<std::size_t>(node)].x()),
               CsvWriter::num(mesh.coords[static_cast<std::size_t>(node)].y()),
               CsvWriter::num(uv[0]), CsvWriter::num(uv[1]), CsvWriter::num(vv[0]),
               CsvWriter::num(vv[1]), std::to_string(g3), std::to_string(g4),
               CsvWriter::num(vng), CsvWriter::num(sn), CsvWriter::num(st1),
               CsvWriter::num(st2), CsvWriter::num(eta), CsvWriter::num(slip)});
    }
  }
}

int cmd_simulate(const SimulateOptions& opt) {
  ContactScenario scn = load_with_overrides(opt);
  std::filesystem::create_directories(opt.out_dir);
  write_manifest(make_manifest("simulate", opt), opt.out_dir);

  ContactProblem cp = build_abstract(scn);
  AuditReport audit = audit_scenario(cp);
  write_audit_report(audit, opt.out_dir);
  if (!audit.all_pass()) {
    print_audit(audit);
    std::cerr << "simulate: audit gates failed, refusing to run\n";
    return kExitNumerical;
  }
  if (opt.audit_only) return print_audit(audit);

  Document summary;
  summary.set("", "schema", "vhisolve.summary.v1");
  summary.set("", "scenario", scn.name);
  summary.set_num("", "h0_margin", audit.h0_margin);
  summary.set_num("", "contact_margin_fraction", audit.contact_margin_fraction);

  struct LevelRun {
    int N;
    EvolutionReport march;
    EvolutionReport picard;
    bool has_march = false, has_picard = false;
  };
  std::vector<LevelRun> levels;

  try {
    for (int k = 0; k <= opt.halve_dt; ++k) {
      ContactScenario lvl = scn;
      lvl.grid = TimeGrid(scn.grid.T, scn.grid.N << k);
      ContactProblem lp = k == 0 ? cp : build_abstract(lvl);
      EvolutionConfig cfg = lp.evolution_config();
      LevelRun run;
      run.N = lvl.grid.N;
      if (opt.mode == "march" || opt.mode == "both") {
        run.march = time_march(lp.abstract, cfg);
        run.has_march = true;
      }
      if (opt.mode == "picard" || opt.mode == "both") {
        run.picard = picard_global(lp.abstract, cfg, Trajectory(cfg.grid, lp.abstract.dim));
        run.has_picard = true;
      }
      levels.push_back(std::move(run));

      if (k == 0) {
        const EvolutionReport& primary = levels[0].has_march ? levels[0].march : levels[0].picard;
        write_solution_csv(opt.out_dir + "/solution.csv", cp, primary);
        if (levels[0].has_march && levels[0].has_picard) {
          write_solution_csv(opt.out_dir + "/solution_picard.csv", cp, levels[0].picard);
          const double dist = traj_l2_distance(levels[0].march.trajectory,
                                               levels[0].picard.trajectory, *cp.abstract.metric,
                                               scn.rule);
          summary.set_num("cross_method", "distance", dist);
          summary.set_num("cross_method", "bound_10_picard_tol", 10.0 * scn.picard_tol);
        }
        ComplementarityReport comp = complementarity_report(cp, primary);
        summary.set_num("complementarity", "max_feasibility_violation",
                        comp.max_feasibility_violation);
        summary.set_num("complementarity", "max_sign_violation", comp.max_sign_violation);
        summary.set_num("complementarity", "max_product", comp.max_product);
        summary.set_num("complementarity", "max_cone_violation", comp.max_cone_violation);
        summary.set_num("complementarity", "max_compliance_err", comp.max_compliance_err);
        summary.set_num("complementarity", "max_angle_err", comp.max_angle_err);
        if (levels[0].has_picard) {
          const auto& pr = levels[0].picard;
          summary.set("picard", "sweeps", std::to_string(pr.sweeps));
          std::string hist;
          for (std::size_t i = 0; i < pr.picard_residuals.size(); ++i)
            hist += (i ? " " : "") + fmt_g17(pr.picard_residuals[i]);
          summary.set("picard", "residuals", hist);
        }
        if (levels[0].has_march) {
          long total_inner = 0;
          for (const auto& st : levels[0].march.node_stats) total_inner += st.inner;
          summary.set("march", "total_inner_iterations", std::to_string(total_inner));
        }
      }
    }
  } catch (const Error& e) {
    std::cerr << "simulate: " << e.what() << "\n";
    return kExitNumerical;
  }

  if (opt.halve_dt > 0) {
    // Error of each level against the finest grid at the shared nodes.
    const LevelRun& fine = levels.back();
    const Trajectory& ref = fine.has_march ? fine.march.trajectory : fine.picard.trajectory;
    CsvWriter csv(opt.out_dir + "/refinement.csv", "vhisolve.refine.v1",
                  {"level", "steps", "error_vs_finest"});
    double prev = -1.0;
    bool monotone = true;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
      const Trajectory& coarse =
          levels[k].has_march ? levels[k].march.trajectory : levels[k].picard.trajectory;
      const int stride = fine.N / levels[k].N;
      double acc = 0.0;
      for (int n = 0; n <= levels[k].N; ++n) {
        const double q = quad_weight(coarse.grid, scn.rule, levels[k].N, n);
        if (q == 0.0) continue;
        const double d = cp.abstract.metric->norm(coarse.at(n) - ref.at(n * stride));
        acc += q * d * d;
      }
      const double err = std::sqrt(acc);
      csv.row({std::to_string(k), std::to_string(levels[k].N), CsvWriter::num(err)});
      if (prev >= 0.0 && err > prev) monotone = false;
      prev = err;
    }
    summary.set("refinement", "monotone_decrease", monotone ? "true" : "false");
  }

  write_file(opt.out_dir + "/summary.txt", summary.dump());
  std::cout << "simulate: ok, outputs in " << opt.out_dir << "\n";
  return kExitOk;
}

int cmd_toy(const std::string& name, std::uint64_t seed) {
  for (const auto& fi : frozen_oracle_instances()) {
    if (fi.name != name) continue;
    SolveConfig cfg;
    cfg.inner_tol = 1e-11;
    cfg.outer_tol = 1e-11;
    FrozenResult r = solve_frozen(fi.problem, fi.data, cfg);
    const double err = (r.w - fi.expected).norm();
    auto probes = make_minty_probes(fi.problem, r.w, 200, seed);
    MintyReport minty = minty_residual(fi.problem, fi.data, r.w, probes);
    std::cout << name << ": w = [";
    for (Eigen::Index i = 0; i < r.w.size(); ++i) std::cout << (i ? " " : "") << fmt_g17(r.w[i]);
    std::cout << "]\n  expected (" << fi.expected_kind << ") err = " << fmt_g17(err)
              << "\n  minty_min = " << fmt_g17(minty.min_value)
              << " (inner residual " << fmt_g17(r.residual) << ", " << r.inner_iterations
              << " inner iterations)\n";
    return kExitOk;
  }
  if (name == "scalar-ode") {
    for (int N : {100, 200}) {
      AbstractProblem p = make_scalar_ode();
      EvolutionConfig cfg;
      cfg.grid = TimeGrid(1.0, N);
      cfg.frozen.inner_tol = 1e-12;
      cfg.frozen.outer_tol = 1e-12;
      EvolutionReport run = time_march(p, cfg);
      double acc = 0.0;
      for (int n = 0; n <= N; ++n) {
        const double q = quad_weight(cfg.grid, cfg.rule, N, n);
        const double d = run.trajectory.at(n)[0] - std::exp(-cfg.grid.node(n));
        acc += q * d * d;
      }
      std::cout << "scalar-ode N=" << N << ": L2 error vs exp(-t) = " << fmt_g17(std::sqrt(acc))
                << "\n";
    }
    return kExitOk;
  }
  if (name == "dim4-full") {
    AbstractProblem p = make_dim4();
    EvolutionConfig cfg;
    cfg.grid = TimeGrid(1.0, 32);
    cfg.frozen.inner_tol = 1e-11;
    cfg.frozen.outer_tol = 1e-11;
    cfg.picard_tol = 1e-9;
    EvolutionReport march = time_march(p, cfg);
    EvolutionReport picard = picard_global(p, cfg, Trajectory(cfg.grid, p.dim));
    const double dist =
        traj_l2_distance(march.trajectory, picard.trajectory, *p.metric, cfg.rule);
    StatePerturbation dp = StatePerturbation::random(p, cfg.grid, 0.5, seed);
    StabilityReport stab = stability_ratio(p, cfg, dp);
    std::cout << "dim4-full: cross-method distance = " << fmt_g17(dist) << "\n  picard sweeps = "
              << picard.sweeps << ", residuals:";
    for (double r : picard.picard_residuals) std::cout << " " << fmt_g17(r);
    std::cout << "\n  stability: lhs = " << fmt_g17(stab.lhs) << " rhs = " << fmt_g17(stab.rhs)
              << " max_ratio = " << fmt_g17(stab.max_ratio)
              << (stab.pass ? " (pass)" : " (FAIL)") << "\n";
    return stab.pass ? kExitOk : kExitNumerical;
  }
  std::cerr << "unknown toy instance '" << name << "'; available:\n";
  for (const auto& n : toy_names()) std::cerr << "  " << n << "\n";
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"solver for history-dependent quasi variational-hemivariational inequalities"};
  app.require_subcommand(1);

  SimulateOptions aopt;
  CLI::App* audit = app.add_subcommand("audit", "run the hypothesis audits for a scenario");
  audit->add_option("--scenario", aopt.scenario_path, "scenario file")->required();
  audit->add_option("--out", aopt.out_dir, "output directory");
  auto* aseed = audit->add_option("--seed", aopt.seed, "sampling seed override");

  SimulateOptions sopt;
  CLI::App* sim = app.add_subcommand("simulate", "audit and solve a contact scenario");
  sim->add_option("--scenario", sopt.scenario_path, "scenario file")->required();
  sim->add_option("--mode", sopt.mode, "march | picard | both")
      ->check(CLI::IsMember({"march", "picard", "both"}));
  sim->add_option("--out", sopt.out_dir, "output directory");
  auto* sseed = sim->add_option("--seed", sopt.seed, "sampling seed override");
  sim->add_option("--halve-dt", sopt.halve_dt, "extra grid refinements")->check(CLI::Range(0, 6));
  sim->add_option("--tol", sopt.tol, "override inner/picard tolerances");
  sim->add_flag("--audit-only", sopt.audit_only, "stop after the audit gates");

  std::string toy_name;
  std::uint64_t toy_seed = 424242;
  CLI::App* toy = app.add_subcommand("toy", "run a named low-dimensional instance");
  toy->add_option("name", toy_name, "instance name")->required();
  toy->add_option("--seed", toy_seed, "probe seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (audit->parsed()) {
      aopt.seed_set = aseed->count() > 0;
      return cmd_audit(aopt);
    }
    if (sim->parsed()) {
      sopt.seed_set = sseed->count() > 0;
      return cmd_simulate(sopt);
    }
    if (toy->parsed()) return cmd_toy(toy_name, toy_seed);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SmallnessError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error (" << e.kind() << "): " << e.what() << "\n";
    return e.kind() == "io" || e.kind() == "scenario" ? kExitUsage : kExitNumerical;
  }
  return kExitUsage;
}
