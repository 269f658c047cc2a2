#pragma once

#include "vhi/contact.hpp"

namespace vhi {

/// One hypothesis check. `worst_slack` is the smallest margin by which the
/// defining inequality held over the sample sweep (negative = violated);
/// `witness` keeps the violating inputs for replay.
struct AuditEntry {
  std::string name;
  double claimed = 0.0;
  double estimate = 0.0;
  double worst_slack = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  int samples = 0;
  double witness_t = 0.0;
  std::vector<Vec> witness;
  std::string note;
};

struct AuditReport {
  std::vector<AuditEntry> entries;
  double h0_margin = 0.0;
  double contact_margin_fraction = 0.0;

  bool all_pass() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }
  const AuditEntry* find(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return &e;
    return nullptr;
  }
};

/// H(A)(d): monotonicity in v against the Lipschitz coupling in the history
/// slot; also samples a strong-monotonicity estimate for m_A.
AuditEntry audit_operator_A(const AbstractProblem& p, int samples, std::uint64_t seed);

/// Monotonicity of A + M* dj(M .) under the smallness condition.
AuditEntry audit_multivalued_monotone(const AbstractProblem& p, int samples, std::uint64_t seed);

/// The contact smallness inequality with a safety factor: pass iff
/// safety * (k* m_jnu |gamma|^4 + p* L_mu |gamma|^2) < m_A.
AuditEntry audit_contact_smallness(const ContactProblem& cp, double safety = 1.05);

/// Four-point inequality of the convex potential plus midpoint convexity.
AuditEntry audit_potential_phi(const AbstractProblem& p, int samples, std::uint64_t seed);

/// Subgradient growth bound |dj|_{X*} <= c0j + c1j |zeta| + c2j |x|.
AuditEntry audit_subgradient_growth(const AbstractProblem& p, int samples, std::uint64_t seed);

/// Smallness margin (H_0) as an entry (claimed = estimate = margin).
AuditEntry audit_h0_margin(const AbstractProblem& p);

/// Dense 1D scans of the boundary laws against their declared constants.
std::vector<AuditEntry> audit_boundary_laws(const BoundaryLaws& laws, double t_max,
                                            double r_range);

/// Discrete H(R) quotients on random trajectory pairs for R1, R3, R4.
std::vector<AuditEntry> audit_histories(const AbstractProblem& p, const TimeGrid& grid,
                                        int pairs, std::uint64_t seed);

/// Every gate for a contact scenario, in a fixed order; deterministic for a
/// fixed seed.
AuditReport audit_scenario(const ContactProblem& cp);

/// Every gate that applies to a bare abstract instance.
AuditReport audit_abstract(const AbstractProblem& p, const TimeGrid& grid, int samples,
                           std::uint64_t seed);

/// Re-evaluates a failed entry's defining inequality from its witness;
/// returns the reproduced slack (same sign convention as worst_slack).
double replay_witness(const AbstractProblem& p, const AuditEntry& entry);

}  // namespace vhi
