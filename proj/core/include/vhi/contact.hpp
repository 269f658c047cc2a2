#pragma once

#include "vhi/evolution.hpp"
#include "vhi/scalar_law.hpp"

#include <array>

namespace vhi {

/// Structured triangulation of a rectangle. Boundary tags: 1 = left edge
/// (clamped), 2 = top and right edges (traction), 3 = bottom-left half
/// (unilateral + friction), 4 = bottom-right half (compliance + Coulomb).
struct RectMesh {
  double lx = 1.0, ly = 1.0;
  int nx = 1, ny = 1;
  std::vector<Eigen::Vector2d> coords;
  std::vector<std::array<int, 3>> tris;

  struct BoundaryEdge {
    int a = 0, b = 0;
    int tag = 0;
  };
  std::vector<BoundaryEdge> bedges;

  std::vector<int> gamma1, gamma2, gamma3, gamma4;  // node sets; 3/4 exclude clamped nodes
  std::vector<Eigen::Vector2d> node_normal;     // averaged over all adjacent boundary edges
  std::vector<Eigen::Vector2d> contact_normal;  // averaged over gamma3/gamma4 edges only

  int n_nodes() const { return static_cast<int>(coords.size()); }
  int node_id(int i, int j) const { return j * (nx + 1) + i; }
};

RectMesh make_rect_mesh(double lx, double ly, int nx, int ny);
/// Rotates coordinates and normals by +90 degrees; tags and connectivity kept.
RectMesh rotate90(const RectMesh& m);

/// Isotropic viscosity pair, elasticity Lame pair, exponential relaxation
/// kernel C(t) = kappa * exp(-t / tau_r) * B.
struct Material {
  double theta1 = 1.0, theta2 = 0.0;        // viscosity (Pa s)
  double lame_lambda = 1.0, lame_mu = 1.0;  // elasticity (Pa)
  double kappa = 0.0;                       // relaxation amplitude (dimensionless vs B)
  double tau_r = 1.0;                       // relaxation time (s)

  double m_A() const { return 2.0 * theta1; }
  double visc_bound() const { return 2.0 * theta1 + 2.0 * theta2; }   // op norm of the A map
  double elast_bound() const { return 2.0 * lame_mu + 2.0 * lame_lambda; }
};

/// Boundary laws with their declared Lipschitz/bound constants.
struct BoundaryLaws {
  double F0 = 1.0, cf = 0.0;      // friction bound F_b(t,r) = F0 (1 + cf r/(1+r))
  double k1 = 1.0, kstar = 1.0;   // damper k(t,r) = k1 + (kstar-k1)/(1+|r|)
  double pstar = 0.0, rstar = 1.0;  // compliance p(t,r) = pstar clamp(r,0,rstar)/rstar
  double mu0 = 0.0;               // friction coefficient mu(t,r) = mu0/(1+r)
  double gap = 1.0;               // unilateral bound g on the normal velocity
  ScalarLaw jnu = default_normal_damper_law();

  double Fb(double t, double r) const;
  double k(double t, double r) const;
  double p(double t, double r) const;
  double mu(double t, double r) const;

  double Fb_max() const { return F0 * (1.0 + cf); }
  double L_Fb() const { return F0 * cf; }
  double L_k() const { return kstar - k1; }
  double L_p() const { return rstar > 0.0 ? pstar / rstar : 0.0; }
  double L_mu() const { return mu0; }
  double mu_star() const { return mu0; }
  double c0bar() const { return jnu.deriv_bound(); }
  double m_jnu() const { return jnu.relaxed_monotonicity_constant(); }
};

/// Piecewise-linear-in-time uniform load; `nodes` restricts a traction to a
/// subset of the gamma2 boundary nodes (empty = all).
struct LoadSeries {
  std::vector<double> times;
  std::vector<Eigen::Vector2d> values;
  std::vector<int> nodes;

  bool empty() const { return times.empty(); }
  Eigen::Vector2d at(double t) const;
};

struct ContactScenario {
  std::string name = "scenario";
  double lx = 2.0, ly = 1.0;
  int nx = 4, ny = 2;
  Material material;
  BoundaryLaws laws;
  LoadSeries body;      // volume density over Omega (N/m^3)
  LoadSeries traction;  // surface density on gamma2 (N/m^2)
  TimeGrid grid{1.0, 10};
  QuadratureRule rule = QuadratureRule::LeftRectangle;
  SolveConfig solver;
  double picard_tol = 1e-8;
  int max_picard = 100;
  Vec u0_nodes;  // per-node initial displacement (2 per node); empty = zero

  std::uint64_t audit_seed = 20240501;
  int audit_samples = 200;
  double audit_safety = 1.05;
  double audit_scale() const;  // sampling magnitude for the hypothesis audits
  double load_scale() const;   // reference traction magnitude for report tolerances
};

/// Assembled discrete spaces and element data.
struct ContactAssembly {
  Eigen::Index dim = 0;  // 2 * free nodes
  std::vector<int> dof_of_node;  // base DoF index per node, -1 when clamped
  std::shared_ptr<EnergyMetric> metric;

  Mat B;        // (3 nel) x dim engineering strains per element
  Vec areas;    // per element
  Vec e_pair;   // pairing weights per stress slot (area, area, area)
  Vec e_norm;   // E-norm weights per stress slot (area, area, 2 area)
  Mat KA;       // viscosity form
  Mat EB;       // strain -> elastic stress map, row blocks D_B * B_e

  std::shared_ptr<TraceOperator> M;  // normal trace on gamma3
  Mat T3;                            // tangential component on gamma3 nodes
  Mat N4, T4;                        // normal/tangential components on gamma4 nodes
  Vec w3, w4;                        // lumped boundary weights
  std::vector<int> g3nodes, g4nodes;
  double meas_g3 = 0.0, meas_g4 = 0.0;

  Mat gamma_full;   // full boundary trace (both components, free boundary nodes)
  Vec gamma_w;      // its lumped weights
  double gamma_norm = 0.0;  // certified |gamma| estimate
  double m_norm = 0.0;      // certified |M| estimate

  /// Per contact node bookkeeping for the separable prox and the reports.
  struct ContactNode {
    int node = -1;
    int ix = -1, iy = -1;
    Eigen::Vector2d nu, tau;
    double w3 = 0.0, w4 = 0.0;  // zero when the node is not on that segment
    int g3_index = -1, g4_index = -1;
  };
  std::vector<ContactNode> cnodes;

  Vec u0;  // free-DoF initial displacement

  Vec node_values(const Vec& dofs, int node) const;  // 2-vector, zero when clamped
};

ContactAssembly assemble_spaces(const ContactScenario& scn, const RectMesh& mesh);

/// sigma = D_A e_vel + D_B e_disp + memory, per element (flat Voigt stacks).
Vec constitutive_stress(const Material& m, const Vec& e_vel, const Vec& e_disp, const Vec& memory);

struct SmallnessInfo {
  double lhs = 0.0;     // k* m_jnu |gamma|^4 + p* L_mu |gamma|^2
  double rhs = 0.0;     // m_A = 2 theta1
  double margin_fraction = 0.0;  // 1 - lhs/rhs
  bool pass = false;
};

struct ContactProblem {
  AbstractProblem abstract;
  RectMesh mesh;
  ContactAssembly assembly;
  ContactScenario scenario;
  SmallnessInfo smallness;

  EvolutionConfig evolution_config() const;
};

/// Maps the scenario to the abstract problem exactly as the weak form
/// prescribes: A from the viscosity form plus the history stress, phi from the
/// friction bound and compliance terms, j from the damped normal response,
/// histories R1 (stress memory), R2 = 0, R3 (slip, normal displacement on
/// gamma4), R4 (normal displacement on gamma3). Succeeds even when the
/// smallness condition fails, flagging the margin; solvers refuse later.
ContactProblem build_abstract(const ContactScenario& scn);
ContactProblem build_abstract(const ContactScenario& scn, const RectMesh& mesh);

struct ComplementarityRow {
  int time_index = 0;
  double t = 0.0;
  int node = 0;
  bool on_g3 = false, on_g4 = false;
  double vn_minus_g = 0.0;   // u'_nu - g (gamma3) or just u'_nu (gamma4-only)
  double sigma_n = 0.0;      // recovered normal traction density
  double eta = 0.0;          // damper selection k(u_nu) * beta(u'_nu) (gamma3)
  double sign_slack = 0.0;   // sigma_n + eta (should be <= 0 on gamma3)
  double product = 0.0;      // (u'_nu - g)(sigma_n + eta)
  double tau_norm = 0.0;     // |sigma_tau|
  double tau_bound = 0.0;    // friction bound at this node
  double cone_slack = 0.0;   // tau_bound - tau_norm
  double slip = 0.0;         // accumulated slip (gamma3)
  double slide_speed = 0.0;  // |u'_tau|
  double angle_err = 0.0;    // angle between sigma_tau and -u'_tau when sliding
  double compliance_err = 0.0;  // |sigma_n + p(u_nu)| (gamma4)
};

struct ComplementarityReport {
  std::vector<ComplementarityRow> rows;
  double max_feasibility_violation = 0.0;  // max(u'_nu - g, 0)
  double max_sign_violation = 0.0;         // max(sigma_n + eta, 0) on gamma3
  double max_product = 0.0;
  double max_cone_violation = 0.0;
  double max_compliance_err = 0.0;
  double max_angle_err = 0.0;
};

/// Reconstructs boundary tractions from the variational residual and tabulates
/// the contact law identities along a converged trajectory.
ComplementarityReport complementarity_report(const ContactProblem& cp, const EvolutionReport& run);

}  // namespace vhi
