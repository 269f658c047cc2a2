#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace vhi {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class of all solver-facing errors; carries a short machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

/// Dimension or shape mismatch between operands.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error("dimension", what) {}
};

/// Smallness condition violated; the solver refuses to run.
class SmallnessError : public Error {
 public:
  SmallnessError(double margin, const std::string& what)
      : Error("smallness", what), margin_(margin) {}
  double margin() const { return margin_; }

 private:
  double margin_;
};

/// Iteration budget exhausted; keeps the residual history for diagnosis.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : Error("convergence", what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Forward-backward step kept diverging even after step halving.
class StepSizeError : public Error {
 public:
  StepSizeError(double last_rho, const std::string& what)
      : Error("step_size", what), last_rho_(last_rho) {}
  double last_rho() const { return last_rho_; }

 private:
  double last_rho_;
};

class ParseError : public Error {
 public:
  ParseError(int line, int col, const std::string& what)
      : Error("parse", "line " + std::to_string(line) + ", col " + std::to_string(col) + ": " + what),
        line_(line), col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_ = 0;
  int col_ = 0;
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline void require_finite(const Vec& v, const char* label) {
  if (!v.allFinite()) throw Error("nonfinite", std::string(label) + " contains NaN/Inf");
}

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* label) {
  if (got != want)
    throw DimensionError(std::string(label) + ": dimension " + std::to_string(got) +
                         ", expected " + std::to_string(want));
}

/// Deterministic RNG used by every sampling routine; seeded explicitly so that
/// reports and CSV outputs are reproducible bit-for-bit.
using Rng = std::mt19937_64;

inline Vec gaussian_vec(Rng& rng, Eigen::Index n, double sigma = 1.0) {
  std::normal_distribution<double> N(0.0, sigma);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = N(rng);
  return v;
}

/// Fixed-width decimal formatting shared by CSV and report writers.
std::string fmt_g17(double x);

/// FNV-1a 64-bit hash of a byte string (input checksums in run manifests).
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace vhi
