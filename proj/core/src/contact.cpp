#include "vhi/contact.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace vhi {

namespace {

Eigen::Matrix3d viscosity_matrix(const Material& m) {
  Eigen::Matrix3d d;
  d << 2 * m.theta1 + m.theta2, m.theta2, 0, m.theta2, 2 * m.theta1 + m.theta2, 0, 0, 0, m.theta1;
  return d;
}

Eigen::Matrix3d elasticity_matrix(const Material& m) {
  Eigen::Matrix3d d;
  d << 2 * m.lame_mu + m.lame_lambda, m.lame_lambda, 0, m.lame_lambda,
      2 * m.lame_mu + m.lame_lambda, 0, 0, 0, m.lame_mu;
  return d;
}

double soft_threshold(double x, double a) {
  if (x > a) return x - a;
  if (x < -a) return x + a;
  return 0.0;
}

}  // namespace

RectMesh make_rect_mesh(double lx, double ly, int nx, int ny) {
  if (!(lx > 0) || !(ly > 0) || nx < 1 || ny < 1)
    throw Error("mesh", "make_rect_mesh: invalid extents or subdivision");
  RectMesh m;
  m.lx = lx;
  m.ly = ly;
  m.nx = nx;
  m.ny = ny;
  m.coords.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.coords.emplace_back(lx * i / nx, ly * j / ny);

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int n00 = m.node_id(i, j), n10 = m.node_id(i + 1, j);
      const int n01 = m.node_id(i, j + 1), n11 = m.node_id(i + 1, j + 1);
      m.tris.push_back({n00, n10, n11});
      m.tris.push_back({n00, n11, n01});
    }

  // Boundary tags: left clamped, top+right traction, bottom split into the
  // unilateral half (x < lx/2) and the compliance half.
  for (int j = 0; j < ny; ++j) {
    m.bedges.push_back({m.node_id(0, j), m.node_id(0, j + 1), 1});
    m.bedges.push_back({m.node_id(nx, j), m.node_id(nx, j + 1), 2});
  }
  for (int i = 0; i < nx; ++i) {
    m.bedges.push_back({m.node_id(i, ny), m.node_id(i + 1, ny), 2});
    const double xmid = lx * (i + 0.5) / nx;
    m.bedges.push_back({m.node_id(i, 0), m.node_id(i + 1, 0), xmid < 0.5 * lx ? 3 : 4});
  }

  const int nn = m.n_nodes();
  m.node_normal.assign(static_cast<std::size_t>(nn), Eigen::Vector2d::Zero());
  m.contact_normal.assign(static_cast<std::size_t>(nn), Eigen::Vector2d::Zero());
  Eigen::Vector2d centroid(0.0, 0.0);
  for (const auto& c : m.coords) centroid += c;
  centroid /= nn;

  std::vector<char> in1(nn, 0), in2(nn, 0), in3(nn, 0), in4(nn, 0);
  for (const auto& e : m.bedges) {
    const Eigen::Vector2d pa = m.coords[static_cast<std::size_t>(e.a)];
    const Eigen::Vector2d pb = m.coords[static_cast<std::size_t>(e.b)];
    const Eigen::Vector2d d = pb - pa;
    Eigen::Vector2d nrm(d.y(), -d.x());
    if (nrm.dot(0.5 * (pa + pb) - centroid) < 0) nrm = -nrm;
    nrm.normalize();
    for (int v : {e.a, e.b}) {
      m.node_normal[static_cast<std::size_t>(v)] += nrm;
      if (e.tag == 3 || e.tag == 4) m.contact_normal[static_cast<std::size_t>(v)] += nrm;
    }
    switch (e.tag) {
      case 1: in1[static_cast<std::size_t>(e.a)] = in1[static_cast<std::size_t>(e.b)] = 1; break;
      case 2: in2[static_cast<std::size_t>(e.a)] = in2[static_cast<std::size_t>(e.b)] = 1; break;
      case 3: in3[static_cast<std::size_t>(e.a)] = in3[static_cast<std::size_t>(e.b)] = 1; break;
      case 4: in4[static_cast<std::size_t>(e.a)] = in4[static_cast<std::size_t>(e.b)] = 1; break;
      default: throw Error("mesh", "make_rect_mesh: bad tag");
    }
  }
  for (int v = 0; v < nn; ++v) {
    auto& nv = m.node_normal[static_cast<std::size_t>(v)];
    if (nv.norm() > 0) nv.normalize();
    auto& cv = m.contact_normal[static_cast<std::size_t>(v)];
    if (cv.norm() > 0) cv.normalize();
    if (in1[static_cast<std::size_t>(v)]) m.gamma1.push_back(v);
    if (in2[static_cast<std::size_t>(v)]) m.gamma2.push_back(v);
    if (in3[static_cast<std::size_t>(v)] && !in1[static_cast<std::size_t>(v)]) m.gamma3.push_back(v);
    if (in4[static_cast<std::size_t>(v)] && !in1[static_cast<std::size_t>(v)]) m.gamma4.push_back(v);
  }
  return m;
}

RectMesh rotate90(const RectMesh& src) {
  // Same graph and tags, rotated geometry; the nx/ny/lx/ly fields keep
  // describing the original construction layout.
  RectMesh m = src;
  for (auto& c : m.coords) c = Eigen::Vector2d(-c.y(), c.x());
  for (auto& n : m.node_normal) n = Eigen::Vector2d(-n.y(), n.x());
  for (auto& n : m.contact_normal) n = Eigen::Vector2d(-n.y(), n.x());
  return m;
}

double BoundaryLaws::Fb(double, double r) const {
  // accumulated slip is nonnegative; the law is extended by clamping so the
  // bound and Lipschitz constants hold on all of R
  const double s = std::max(r, 0.0);
  return F0 * (1.0 + cf * s / (1.0 + s));
}
double BoundaryLaws::k(double, double r) const { return k1 + (kstar - k1) / (1.0 + std::abs(r)); }
double BoundaryLaws::p(double, double r) const {
  return rstar > 0.0 ? pstar * std::clamp(r, 0.0, rstar) / rstar : 0.0;
}
double BoundaryLaws::mu(double, double r) const { return mu0 / (1.0 + std::max(r, 0.0)); }

Eigen::Vector2d LoadSeries::at(double t) const {
  if (times.empty()) return Eigen::Vector2d::Zero();
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times.begin());
  const std::size_t lo = hi - 1;
  const double s = (t - times[lo]) / (times[hi] - times[lo]);
  return (1.0 - s) * values[lo] + s * values[hi];
}

double ContactScenario::audit_scale() const {
  return std::max({1.0, laws.gap, laws.rstar, 2.0});
}

double ContactScenario::load_scale() const {
  double s = 0.0;
  for (const auto& v : traction.values) s = std::max(s, v.cwiseAbs().maxCoeff());
  for (const auto& v : body.values) s = std::max(s, v.cwiseAbs().maxCoeff() * ly);
  return s;
}

Vec ContactAssembly::node_values(const Vec& dofs, int node) const {
  Vec out = Vec::Zero(2);
  const int base = dof_of_node[static_cast<std::size_t>(node)];
  if (base >= 0) {
    out[0] = dofs[base];
    out[1] = dofs[base + 1];
  }
  return out;
}

ContactAssembly assemble_spaces(const ContactScenario& scn, const RectMesh& mesh) {
  ContactAssembly as;
  const int nn = mesh.n_nodes();

  as.dof_of_node.assign(static_cast<std::size_t>(nn), -1);
  std::vector<char> clamped(static_cast<std::size_t>(nn), 0);
  for (int v : mesh.gamma1) clamped[static_cast<std::size_t>(v)] = 1;
  int free_count = 0;
  for (int v = 0; v < nn; ++v)
    if (!clamped[static_cast<std::size_t>(v)]) as.dof_of_node[static_cast<std::size_t>(v)] = 2 * free_count++;
  as.dim = 2 * free_count;
  if (mesh.gamma1.empty()) throw Error("mesh", "assemble_spaces: meas(Gamma_1) must be positive");

  const int nel = static_cast<int>(mesh.tris.size());
  as.B = Mat::Zero(3 * nel, as.dim);
  as.areas = Vec::Zero(nel);
  as.e_pair = Vec::Zero(3 * nel);
  as.e_norm = Vec::Zero(3 * nel);

  const Eigen::Matrix3d DA = viscosity_matrix(scn.material);
  const Eigen::Matrix3d DB = elasticity_matrix(scn.material);
  const Eigen::DiagonalMatrix<double, 3> Weps(1.0, 1.0, 0.5);

  Mat gram = Mat::Zero(as.dim, as.dim);
  as.KA = Mat::Zero(as.dim, as.dim);
  as.EB = Mat::Zero(3 * nel, as.dim);

  for (int e = 0; e < nel; ++e) {
    const auto& tri = mesh.tris[static_cast<std::size_t>(e)];
    const Eigen::Vector2d p0 = mesh.coords[static_cast<std::size_t>(tri[0])];
    const Eigen::Vector2d p1 = mesh.coords[static_cast<std::size_t>(tri[1])];
    const Eigen::Vector2d p2 = mesh.coords[static_cast<std::size_t>(tri[2])];
    const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
    const double area = 0.5 * det;
    if (!(area > 0.0))
      throw Error("mesh", "assemble_spaces: degenerate element " + std::to_string(e) +
                              " (area " + fmt_g17(area) + ")");
    as.areas[e] = area;
    as.e_pair.segment<3>(3 * e) = Vec::Constant(3, area);
    as.e_norm.segment<3>(3 * e) << area, area, 2 * area;

    const double bcoef[3] = {(p1.y() - p2.y()) / det, (p2.y() - p0.y()) / det,
                             (p0.y() - p1.y()) / det};
    const double ccoef[3] = {(p2.x() - p1.x()) / det, (p0.x() - p2.x()) / det,
                             (p1.x() - p0.x()) / det};
    Eigen::Matrix<double, 3, 6> Be = Eigen::Matrix<double, 3, 6>::Zero();
    for (int a = 0; a < 3; ++a) {
      Be(0, 2 * a) = bcoef[a];
      Be(1, 2 * a + 1) = ccoef[a];
      Be(2, 2 * a) = ccoef[a];
      Be(2, 2 * a + 1) = bcoef[a];
    }
    const Eigen::Matrix<double, 6, 6> ge = area * (Be.transpose() * Weps * Be);
    const Eigen::Matrix<double, 6, 6> ke = area * (Be.transpose() * DA * Be);
    const Eigen::Matrix<double, 3, 6> eb = DB * Be;

    int dof[6];
    for (int a = 0; a < 3; ++a) {
      const int base = as.dof_of_node[static_cast<std::size_t>(tri[a])];
      dof[2 * a] = base;
      dof[2 * a + 1] = base >= 0 ? base + 1 : -1;
    }
    for (int a = 0; a < 6; ++a) {
      if (dof[a] < 0) continue;
      as.B(3 * e + 0, dof[a]) += Be(0, a);
      as.B(3 * e + 1, dof[a]) += Be(1, a);
      as.B(3 * e + 2, dof[a]) += Be(2, a);
      as.EB(3 * e + 0, dof[a]) += eb(0, a);
      as.EB(3 * e + 1, dof[a]) += eb(1, a);
      as.EB(3 * e + 2, dof[a]) += eb(2, a);
      for (int b = 0; b < 6; ++b) {
        if (dof[b] < 0) continue;
        gram(dof[a], dof[b]) += ge(a, b);
        as.KA(dof[a], dof[b]) += ke(a, b);
      }
    }
  }
  as.metric = std::make_shared<EnergyMetric>(std::move(gram));

  // Lumped boundary weights per tag.
  std::map<int, double> w3map, w4map, wbmap;
  for (const auto& e : mesh.bedges) {
    const double len = (mesh.coords[static_cast<std::size_t>(e.b)] -
                        mesh.coords[static_cast<std::size_t>(e.a)])
                           .norm();
    for (int v : {e.a, e.b}) {
      wbmap[v] += 0.5 * len;
      if (e.tag == 3) w3map[v] += 0.5 * len;
      if (e.tag == 4) w4map[v] += 0.5 * len;
    }
  }

  auto contact_frame = [&](int v) {
    const Eigen::Vector2d nu = mesh.contact_normal[static_cast<std::size_t>(v)];
    return std::pair<Eigen::Vector2d, Eigen::Vector2d>(nu, Eigen::Vector2d(-nu.y(), nu.x()));
  };

  as.g3nodes = mesh.gamma3;
  as.g4nodes = mesh.gamma4;
  const int m3 = static_cast<int>(as.g3nodes.size());
  const int m4 = static_cast<int>(as.g4nodes.size());
  as.w3 = Vec::Zero(m3);
  as.w4 = Vec::Zero(m4);
  Mat Mmat = Mat::Zero(m3, as.dim);
  as.T3 = Mat::Zero(m3, as.dim);
  as.N4 = Mat::Zero(m4, as.dim);
  as.T4 = Mat::Zero(m4, as.dim);

  std::map<int, ContactAssembly::ContactNode> cmap;
  for (int i = 0; i < m3; ++i) {
    const int v = as.g3nodes[static_cast<std::size_t>(i)];
    as.w3[i] = w3map[v];
    const auto [nu, tau] = contact_frame(v);
    const int base = as.dof_of_node[static_cast<std::size_t>(v)];
    Mmat(i, base) = nu.x();
    Mmat(i, base + 1) = nu.y();
    as.T3(i, base) = tau.x();
    as.T3(i, base + 1) = tau.y();
    auto& cn = cmap[v];
    cn.node = v;
    cn.ix = base;
    cn.iy = base + 1;
    cn.nu = nu;
    cn.tau = tau;
    cn.w3 = as.w3[i];
    cn.g3_index = i;
  }
  for (int i = 0; i < m4; ++i) {
    const int v = as.g4nodes[static_cast<std::size_t>(i)];
    as.w4[i] = w4map[v];
    const auto [nu, tau] = contact_frame(v);
    const int base = as.dof_of_node[static_cast<std::size_t>(v)];
    as.N4(i, base) = nu.x();
    as.N4(i, base + 1) = nu.y();
    as.T4(i, base) = tau.x();
    as.T4(i, base + 1) = tau.y();
    auto& cn = cmap[v];
    cn.node = v;
    cn.ix = base;
    cn.iy = base + 1;
    cn.nu = nu;
    cn.tau = tau;
    cn.w4 = as.w4[i];
    cn.g4_index = i;
  }
  for (auto& [v, cn] : cmap) as.cnodes.push_back(cn);
  as.meas_g3 = as.w3.sum();
  as.meas_g4 = as.w4.sum();
  as.M = std::make_shared<TraceOperator>(std::move(Mmat), as.w3);

  // Full boundary trace (all boundary nodes with live DoFs, both components).
  std::vector<std::pair<int, double>> bnodes;
  for (const auto& [v, w] : wbmap)
    if (as.dof_of_node[static_cast<std::size_t>(v)] >= 0) bnodes.emplace_back(v, w);
  as.gamma_full = Mat::Zero(2 * static_cast<Eigen::Index>(bnodes.size()), as.dim);
  as.gamma_w = Vec::Zero(2 * static_cast<Eigen::Index>(bnodes.size()));
  for (std::size_t i = 0; i < bnodes.size(); ++i) {
    const int base = as.dof_of_node[static_cast<std::size_t>(bnodes[i].first)];
    as.gamma_full(2 * static_cast<Eigen::Index>(i), base) = 1.0;
    as.gamma_full(2 * static_cast<Eigen::Index>(i) + 1, base + 1) = 1.0;
    as.gamma_w[2 * static_cast<Eigen::Index>(i)] = bnodes[i].second;
    as.gamma_w[2 * static_cast<Eigen::Index>(i) + 1] = bnodes[i].second;
  }

  TraceOperator gamma_op(as.gamma_full, as.gamma_w);
  as.gamma_norm = estimate_operator_norm(gamma_op, *as.metric).estimate;
  as.m_norm = estimate_operator_norm(*as.M, *as.metric).estimate;

  // Initial displacement on free DoFs.
  as.u0 = Vec::Zero(as.dim);
  if (scn.u0_nodes.size() > 0) {
    require_dim(scn.u0_nodes.size(), 2 * nn, "scenario u0");
    for (int v : mesh.gamma1)
      if (scn.u0_nodes[2 * v] != 0.0 || scn.u0_nodes[2 * v + 1] != 0.0)
        throw Error("scenario", "u0 must vanish on the clamped boundary (node " +
                                    std::to_string(v) + ")");
    for (int v = 0; v < nn; ++v) {
      const int base = as.dof_of_node[static_cast<std::size_t>(v)];
      if (base >= 0) {
        as.u0[base] = scn.u0_nodes[2 * v];
        as.u0[base + 1] = scn.u0_nodes[2 * v + 1];
      }
    }
  }
  return as;
}

Vec constitutive_stress(const Material& m, const Vec& e_vel, const Vec& e_disp,
                        const Vec& memory) {
  require_dim(e_disp.size(), e_vel.size(), "constitutive_stress e_disp");
  require_dim(memory.size(), e_vel.size(), "constitutive_stress memory");
  if (e_vel.size() % 3 != 0) throw DimensionError("constitutive_stress: not a Voigt stack");
  const Eigen::Matrix3d DA = viscosity_matrix(m);
  const Eigen::Matrix3d DB = elasticity_matrix(m);
  Vec out(e_vel.size());
  for (Eigen::Index e = 0; e < e_vel.size() / 3; ++e)
    out.segment<3>(3 * e) =
        DA * e_vel.segment<3>(3 * e) + DB * e_disp.segment<3>(3 * e) + memory.segment<3>(3 * e);
  return out;
}

EvolutionConfig ContactProblem::evolution_config() const {
  EvolutionConfig cfg;
  cfg.grid = scenario.grid;
  cfg.frozen = scenario.solver;
  cfg.picard_tol = scenario.picard_tol;
  cfg.max_picard = scenario.max_picard;
  cfg.rule = scenario.rule;
  return cfg;
}

ContactProblem build_abstract(const ContactScenario& scn) {
  return build_abstract(scn, make_rect_mesh(scn.lx, scn.ly, scn.nx, scn.ny));
}

ContactProblem build_abstract(const ContactScenario& scn, const RectMesh& mesh) {
  ContactProblem cp;
  cp.mesh = mesh;
  cp.scenario = scn;
  cp.assembly = assemble_spaces(scn, cp.mesh);
  ContactAssembly& as = cp.assembly;

  AbstractProblem& p = cp.abstract;
  p.name = scn.name;
  p.dim = as.dim;
  p.metric = as.metric;
  p.trace = as.M;
  p.e_space = WeightedSpace(as.e_norm);
  const int m3 = static_cast<int>(as.g3nodes.size());
  const int m4 = static_cast<int>(as.g4nodes.size());
  Vec yw(m3 + m4);
  yw << as.w3, as.w4;
  p.y_space = WeightedSpace(yw);
  p.z_space = WeightedSpace(as.w3);

  // Constraint v_nu <= g on gamma3, written on the signed axis component.
  {
    std::vector<int> idx;
    Vec bound(m3), sign(m3);
    for (int i = 0; i < m3; ++i) {
      const int v = as.g3nodes[static_cast<std::size_t>(i)];
      const Eigen::Vector2d nu = cp.mesh.contact_normal[static_cast<std::size_t>(v)];
      const int base = as.dof_of_node[static_cast<std::size_t>(v)];
      if (std::abs(std::abs(nu.x()) - 1.0) < 1e-12 && std::abs(nu.y()) < 1e-12) {
        idx.push_back(base);
        sign[i] = nu.x() > 0 ? 1.0 : -1.0;
      } else if (std::abs(std::abs(nu.y()) - 1.0) < 1e-12 && std::abs(nu.x()) < 1e-12) {
        idx.push_back(base + 1);
        sign[i] = nu.y() > 0 ? 1.0 : -1.0;
      } else {
        throw Error("mesh", "build_abstract: contact normal not axis-aligned at node " +
                                std::to_string(v));
      }
      bound[i] = scn.laws.gap;
    }
    p.constraint = ConstraintSet::nodewise_signed(std::move(idx), std::move(bound), std::move(sign));
  }

  // A(t, lambda, v) residual: viscosity form plus the paired history stress.
  {
    Mat BtW = as.B.transpose() * as.e_pair.asDiagonal();
    Mat KA = as.KA;
    p.A = [KA, BtW](double, const Vec& lambda, const Vec& v) -> Vec {
      return KA * v + BtW * lambda;
    };
    p.A_bind = [KA, BtW](double, const Vec& lambda) {
      Vec base = BtW * lambda;
      return [KA, base](const Vec& v) -> Vec { return KA * v + base; };
    };
  }

  // Load functional: lumped body force plus gamma2 tractions.
  {
    const int nn = cp.mesh.n_nodes();
    Vec body_w = Vec::Zero(nn);
    for (std::size_t e = 0; e < cp.mesh.tris.size(); ++e)
      for (int a : cp.mesh.tris[e]) body_w[a] += as.areas[static_cast<Eigen::Index>(e)] / 3.0;
    Vec trac_w = Vec::Zero(nn);
    for (const auto& be : cp.mesh.bedges) {
      if (be.tag != 2) continue;
      const double len = (cp.mesh.coords[static_cast<std::size_t>(be.b)] -
                          cp.mesh.coords[static_cast<std::size_t>(be.a)])
                             .norm();
      trac_w[be.a] += 0.5 * len;
      trac_w[be.b] += 0.5 * len;
    }
    std::vector<char> on_list(static_cast<std::size_t>(nn), 1);
    if (!scn.traction.nodes.empty()) {
      on_list.assign(static_cast<std::size_t>(nn), 0);
      for (int v : scn.traction.nodes) {
        if (v < 0 || v >= nn) throw Error("scenario", "traction node out of range");
        on_list[static_cast<std::size_t>(v)] = 1;
      }
    }
    auto dof_of = as.dof_of_node;
    auto body = scn.body;
    auto trac = scn.traction;
    const Eigen::Index dim = as.dim;
    p.f = [=](double t, const Vec&) -> Vec {
      Vec r = Vec::Zero(dim);
      const Eigen::Vector2d fb = body.at(t);
      const Eigen::Vector2d fn = trac.at(t);
      for (int v = 0; v < nn; ++v) {
        const int base = dof_of[static_cast<std::size_t>(v)];
        if (base < 0) continue;
        r[base] += body_w[v] * fb.x();
        r[base + 1] += body_w[v] * fb.y();
        if (trac_w[v] != 0.0 && on_list[static_cast<std::size_t>(v)]) {
          r[base] += trac_w[v] * fn.x();
          r[base + 1] += trac_w[v] * fn.y();
        }
      }
      return r;
    };
  }

  // phi(t, eta, w, v): friction bound on gamma3, compliance + Coulomb on gamma4.
  {
    auto laws = scn.laws;
    auto cnodes = as.cnodes;
    auto phi_value = [laws, cnodes, m3](double t, const Vec& eta, const Vec& w, const Vec& v) {
      double acc = 0.0;
      for (const auto& cn : cnodes) {
        const Eigen::Vector2d vv(v[cn.ix], v[cn.iy]);
        const double vtau = vv.dot(cn.tau);
        if (cn.g3_index >= 0)
          acc += cn.w3 * laws.Fb(t, eta[cn.g3_index]) * std::abs(vtau);
        if (cn.g4_index >= 0) {
          const Eigen::Vector2d wv(w[cn.ix], w[cn.iy]);
          const double pv = laws.p(t, eta[m3 + cn.g4_index]);
          acc += cn.w4 * (pv * vv.dot(cn.nu) +
                          laws.mu(t, std::abs(wv.dot(cn.tau))) * pv * std::abs(vtau));
        }
      }
      return acc;
    };
    p.phi.value_diff = [phi_value](double t, const Vec& eta, const Vec& w, const Vec& v1,
                                   const Vec& v2) {
      return phi_value(t, eta, w, v1) - phi_value(t, eta, w, v2);
    };
    const double gap = scn.laws.gap;
    p.phi.prox = [laws, cnodes, m3, gap](double t, const Vec& eta, const Vec& w_frozen,
                                         const Vec& x, double rho) -> Vec {
      Vec y = x;
      for (const auto& cn : cnodes) {
        const Eigen::Vector2d xv(x[cn.ix], x[cn.iy]);
        double xnu = xv.dot(cn.nu);
        double xtau = xv.dot(cn.tau);
        double shrink = 0.0;
        if (cn.g3_index >= 0) shrink += cn.w3 * laws.Fb(t, eta[cn.g3_index]);
        if (cn.g4_index >= 0) {
          const Eigen::Vector2d wv(w_frozen[cn.ix], w_frozen[cn.iy]);
          const double pv = laws.p(t, eta[m3 + cn.g4_index]);
          xnu -= rho * cn.w4 * pv;
          shrink += cn.w4 * laws.mu(t, std::abs(wv.dot(cn.tau))) * pv;
        }
        if (cn.g3_index >= 0) xnu = std::min(xnu, gap);
        xtau = soft_threshold(xtau, rho * shrink);
        const Eigen::Vector2d yv = xnu * cn.nu + xtau * cn.tau;
        y[cn.ix] = yv.x();
        y[cn.iy] = yv.y();
      }
      return y;
    };
  }

  // j(t, zeta, x) = sum over gamma3 of w3 k(t, zeta_i) jnu(x_i); selections are
  // densities (Riesz representatives in the weighted X metric).
  {
    auto laws = scn.laws;
    const Vec w3 = as.w3;
    p.j.dir_deriv = [laws, w3](double t, const Vec& zeta, const Vec& x, const Vec& d) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < w3.size(); ++i)
        acc += w3[i] * laws.k(t, zeta[i]) * laws.jnu.dir_deriv(x[i], d[i]);
      return acc;
    };
    p.j.subgrad_select = [laws, w3](double t, const Vec& zeta, const Vec& x) -> Vec {
      Vec s(w3.size());
      for (Eigen::Index i = 0; i < w3.size(); ++i)
        s[i] = laws.k(t, zeta[i]) * laws.jnu.select(x[i]);
      return s;
    };
  }

  // Histories: R1 stress memory, R2 = 0, R3 = (slip, normal displacement on
  // gamma4), R4 = normal displacement on gamma3.
  {
    const auto rule = scn.rule;
    WeightedSpace e_sp(as.e_norm);
    HistoryPtr r1 = integral_map_history(as.EB, as.u0, e_sp, rule);
    if (scn.material.kappa != 0.0) {
      const double kap = scn.material.kappa;
      const double tau = scn.material.tau_r;
      r1 = sum_history(r1, convolution_history(
                               as.EB, [kap, tau](double s) { return kap * std::exp(-s / tau); },
                               e_sp, rule));
    }
    p.r1 = r1;
    p.r2 = zero_history(m3, rule);
    p.r3 = stack_history(
        accumulated_norm_history(as.T3, as.u0, WeightedSpace(as.w3), rule),
        integral_map_history(as.N4, as.u0, WeightedSpace(as.w4), rule));
    p.r4 = integral_map_history(as.M->matrix(), as.u0, WeightedSpace(as.w3), rule);
  }

  // Constants, all tied to the certified trace estimates.
  {
    HypothesisConstants c;
    const double gn = as.gamma_norm;
    const auto& laws = scn.laws;
    c.m_A = scn.material.m_A();
    c.mbar_A = 1.0;
    c.a0_max = 0.0;
    c.a1 = 1.0;
    c.a2 = scn.material.visc_bound();
    c.L_f = 0.0;
    c.alpha_phi = laws.pstar * laws.L_mu() * gn * gn;
    c.beta_phi = (laws.L_Fb() + laws.L_p() + laws.mu_star() * laws.L_p()) * gn;
    c.c0j_max = laws.kstar * laws.c0bar() * std::sqrt(as.meas_g3);
    c.c1j = 0.0;
    c.c2j = 0.0;
    c.m_j = laws.kstar * laws.m_jnu() * gn * gn;
    c.m_1 = laws.c0bar() * laws.L_k() * gn;
    c.c_R1 = scn.material.elast_bound() * (1.0 + scn.material.kappa);
    c.c_R2 = 0.0;
    c.c_R3 = gn * std::sqrt(1.0 + scn.grid.T * scn.grid.T);
    c.c_R4 = as.m_norm;
    c.M_norm = as.m_norm;
    p.constants = c;

    const double meas3 = as.meas_g3, meas4 = as.meas_g4;
    const double slope =
        (laws.Fb_max() * std::sqrt(meas3) + laws.pstar * (1.0 + laws.mu_star()) * std::sqrt(meas4)) *
        gn;
    p.phi_lip = [slope](double, double, double) { return slope; };
  }
  p.sample_scale = scn.audit_scale();

  cp.smallness.lhs = scn.laws.kstar * scn.laws.m_jnu() * std::pow(as.gamma_norm, 4) +
                     scn.laws.pstar * scn.laws.L_mu() * as.gamma_norm * as.gamma_norm;
  cp.smallness.rhs = scn.material.m_A();
  cp.smallness.margin_fraction = 1.0 - cp.smallness.lhs / cp.smallness.rhs;
  cp.smallness.pass = cp.smallness.lhs < cp.smallness.rhs;
  return cp;
}

ComplementarityReport complementarity_report(const ContactProblem& cp,
                                             const EvolutionReport& run) {
  if (!run.converged)
    throw Error("usage", "complementarity_report: trajectory is not from a converged solve");
  const AbstractProblem& p = cp.abstract;
  const ContactAssembly& as = cp.assembly;
  const auto& laws = cp.scenario.laws;
  const Trajectory& w = run.trajectory;

  ComplementarityReport rep;
  auto l1 = p.r1->eval_all(w);
  auto l3 = p.r3->eval_all(w);
  auto l4 = p.r4->eval_all(w);
  const int m3 = static_cast<int>(as.g3nodes.size());

  for (int n = 0; n <= w.grid.N; ++n) {
    const double t = w.grid.node(n);
    const Vec& wn = w.at(n);
    const Vec residual = p.A(t, l1[static_cast<std::size_t>(n)], wn) - p.f(t, Vec());
    const Vec& eta_state = l3[static_cast<std::size_t>(n)];
    const Vec& zeta_state = l4[static_cast<std::size_t>(n)];

    for (const auto& cn : as.cnodes) {
      ComplementarityRow row;
      row.time_index = n;
      row.t = t;
      row.node = cn.node;
      row.on_g3 = cn.g3_index >= 0;
      row.on_g4 = cn.g4_index >= 0;

      const Eigen::Vector2d force(residual[cn.ix], residual[cn.iy]);
      const double wtot = cn.w3 + cn.w4;
      const double fnu = force.dot(cn.nu);
      const Eigen::Vector2d ftau = force - fnu * cn.nu;
      row.sigma_n = fnu / wtot;
      row.tau_norm = ftau.norm() / wtot;

      const Eigen::Vector2d vel(wn[cn.ix], wn[cn.iy]);
      const double vnu = vel.dot(cn.nu);
      const double vtau = vel.dot(cn.tau);
      row.vn_minus_g = vnu - laws.gap;
      row.slide_speed = std::abs(vtau);

      double eta_force = 0.0;  // damper + compliance resultant per unit length
      double bound_force = 0.0;
      if (row.on_g3) {
        const double unu = zeta_state[cn.g3_index];
        const double damper = laws.k(t, unu) * laws.jnu.select(vnu);
        row.eta = damper;
        row.slip = eta_state[cn.g3_index];
        eta_force += cn.w3 * damper;
        bound_force += cn.w3 * laws.Fb(t, row.slip);
      }
      if (row.on_g4) {
        const double unu4 = eta_state[m3 + cn.g4_index];
        const double pv = laws.p(t, unu4);
        eta_force += cn.w4 * pv;
        bound_force += cn.w4 * laws.mu(t, row.slide_speed) * pv;
        if (!row.on_g3) row.compliance_err = std::abs(row.sigma_n + pv);
      }
      row.sign_slack = row.sigma_n + eta_force / wtot;
      row.product = row.on_g3 ? row.vn_minus_g * row.sign_slack : 0.0;
      row.tau_bound = bound_force / wtot;
      row.cone_slack = row.tau_bound - row.tau_norm;

      if (row.slide_speed > 1e-8 && row.tau_norm > 0.0) {
        const Eigen::Vector2d slide = vtau * cn.tau;
        const double c = ftau.dot(-slide) / (ftau.norm() * slide.norm());
        row.angle_err = std::acos(std::clamp(c, -1.0, 1.0));
      }

      if (row.on_g3) {
        rep.max_feasibility_violation =
            std::max(rep.max_feasibility_violation, row.vn_minus_g);
        rep.max_sign_violation = std::max(rep.max_sign_violation, row.sign_slack);
        rep.max_product = std::max(rep.max_product, std::abs(row.product));
      }
      if (row.on_g4 && !row.on_g3)
        rep.max_compliance_err = std::max(rep.max_compliance_err, row.compliance_err);
      rep.max_cone_violation = std::max(rep.max_cone_violation, -row.cone_slack);
      if (row.slide_speed > 1e-8)
        rep.max_angle_err = std::max(rep.max_angle_err, row.angle_err);

      rep.rows.push_back(row);
    }
  }
  return rep;
}

}  // namespace vhi
