#pragma once

#include "vhi/evolution.hpp"

namespace vhi {

/// A named frozen-solve instance with its expected solution. Expected values
/// are closed forms or grid-search results reproduced independently by the
/// test oracles.
struct FrozenInstance {
  std::string name;
  std::string description;
  AbstractProblem problem;
  FrozenData data;
  Vec expected;
  std::string expected_kind;  // "closed-form" | "grid-search"
};

/// The shipped table of low-dimensional frozen instances.
std::vector<FrozenInstance> frozen_oracle_instances();

/// Scalar evolution instance w(t) + integral_0^t w = 1, solution exp(-t).
AbstractProblem make_scalar_ode(QuadratureRule rule = QuadratureRule::LeftRectangle);

/// Dense dim-4 instance exercising all four history slots, the quasi phi and
/// the nonconvex j.
AbstractProblem make_dim4(double horizon = 1.0,
                          QuadratureRule rule = QuadratureRule::LeftRectangle);

/// Random strongly monotone instance (identity metric, cap on index 0,
/// prototype j scaled to keep the smallness margin positive).
AbstractProblem make_random_instance(int dim, std::uint64_t seed);

/// Names accepted by the CLI toy command.
std::vector<std::string> toy_names();

}  // namespace vhi
