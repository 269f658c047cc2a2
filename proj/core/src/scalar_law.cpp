#include "vhi/scalar_law.hpp"

#include <algorithm>
#include <cmath>

namespace vhi {

namespace {

// Integral of the linear function through (x0,y0),(x1,y1) over [x0, b], b <= x1.
double lin_integral(double x0, double y0, double x1, double y1, double b) {
  if (x1 == x0) return 0.0;
  const double s = (y1 - y0) / (x1 - x0);
  const double t = b - x0;
  return y0 * t + 0.5 * s * t * t;
}

}  // namespace

ScalarLaw::ScalarLaw(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw Error("scalar_law", "ScalarLaw: needs at least one node");
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (!(nodes_[i].x > nodes_[i - 1].x))
      throw Error("scalar_law", "ScalarLaw: breakpoints must be strictly increasing");
  cumint_.resize(nodes_.size(), 0.0);
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    cumint_[i] = cumint_[i - 1] + lin_integral(nodes_[i - 1].x, nodes_[i - 1].right,
                                               nodes_[i].x, nodes_[i].left, nodes_[i].x);
  }
}

double ScalarLaw::integral_from_first(double x) const {
  const double x0 = nodes_.front().x;
  const double xm = nodes_.back().x;
  if (x <= x0) return nodes_.front().left * (x - x0);
  if (x >= xm) return cumint_.back() + nodes_.back().right * (x - xm);
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x,
                             [](double v, const Node& n) { return v < n.x; });
  const std::size_t hi = static_cast<std::size_t>(it - nodes_.begin());
  const std::size_t lo = hi - 1;
  return cumint_[lo] + lin_integral(nodes_[lo].x, nodes_[lo].right, nodes_[hi].x,
                                    nodes_[hi].left, x);
}

double ScalarLaw::value(double x) const { return integral_from_first(x) - integral_from_first(0.0); }

double ScalarLaw::deriv_right(double x) const {
  const double xm = nodes_.back().x;
  if (x >= xm) return nodes_.back().right;
  if (x < nodes_.front().x) return nodes_.front().left;
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x,
                             [](double v, const Node& n) { return v < n.x; });
  const std::size_t hi = static_cast<std::size_t>(it - nodes_.begin());
  if (hi == 0) return nodes_.front().left;
  const std::size_t lo = hi - 1;
  if (x == nodes_[lo].x) return nodes_[lo].right;
  const double t = (x - nodes_[lo].x) / (nodes_[hi].x - nodes_[lo].x);
  return nodes_[lo].right + t * (nodes_[hi].left - nodes_[lo].right);
}

double ScalarLaw::deriv_left(double x) const {
  const double x0 = nodes_.front().x;
  if (x <= x0) return nodes_.front().left;
  if (x > nodes_.back().x) return nodes_.back().right;
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x,
                             [](const Node& n, double v) { return n.x < v; });
  const std::size_t hi = static_cast<std::size_t>(it - nodes_.begin());
  if (hi < nodes_.size() && nodes_[hi].x == x) return nodes_[hi].left;
  const std::size_t lo = hi - 1;
  const double t = (x - nodes_[lo].x) / (nodes_[hi].x - nodes_[lo].x);
  return nodes_[lo].right + t * (nodes_[hi].left - nodes_[lo].right);
}

double ScalarLaw::dir_deriv(double x, double d) const {
  return std::max(d * deriv_left(x), d * deriv_right(x));
}

double ScalarLaw::deriv_bound() const {
  double b = 0.0;
  for (const auto& n : nodes_) b = std::max({b, std::abs(n.left), std::abs(n.right)});
  return b;
}

double ScalarLaw::relaxed_monotonicity_constant() const {
  double min_slope = 0.0;
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    const double s = (nodes_[i + 1].left - nodes_[i].right) / (nodes_[i + 1].x - nodes_[i].x);
    min_slope = std::min(min_slope, s);
  }
  for (const auto& n : nodes_)
    if (n.right < n.left) return std::numeric_limits<double>::infinity();
  return std::max(0.0, -min_slope);
}

ScalarLaw ScalarLaw::from_continuous_derivative(
    const std::vector<std::pair<double, double>>& pts) {
  std::vector<Node> nodes;
  nodes.reserve(pts.size());
  for (const auto& [x, y] : pts) nodes.push_back({x, y, y});
  return ScalarLaw(std::move(nodes));
}

ScalarLaw ScalarLaw::quadratic(double c, double range) {
  return from_continuous_derivative({{-range, -c * range}, {range, c * range}});
}

ScalarLaw ScalarLaw::abs() {
  return ScalarLaw({{-1.0, -1.0, -1.0}, {0.0, -1.0, 1.0}, {1.0, 1.0, 1.0}});
}

ScalarLaw default_normal_damper_law() {
  return ScalarLaw::from_continuous_derivative({{0.0, 0.0}, {1.0, 2.0}, {2.0, 1.0}});
}

}  // namespace vhi
