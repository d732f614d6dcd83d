#include "nsclust/labeling.hpp"

#include <algorithm>

#include "nsclust/errors.hpp"

namespace nsclust {

std::string PointVerdict::to_string() const {
  switch (kind) {
    case VerdictKind::Main:
      return "C" + std::to_string(cluster + 1);
    case VerdictKind::Boundary:
      return "boundary(" + std::to_string(cluster + 1) + "," + std::to_string(second + 1) + ")";
    case VerdictKind::Outlier:
      return "outlier";
  }
  return "outlier";
}

PointVerdict classify_point(std::span<const double> t_row, double f, double boundary_t) {
  if (t_row.empty()) throw ShapeMismatch("membership row is empty");
  std::size_t top = 0;
  for (std::size_t j = 1; j < t_row.size(); ++j) {
    if (t_row[j] > t_row[top]) top = j;
  }
  PointVerdict v;
  if (f > t_row[top]) {
    v.kind = VerdictKind::Outlier;
    v.top_memberships = {f, t_row[top]};
    return v;
  }
  if (t_row.size() >= 2) {
    std::size_t second = top == 0 ? 1 : 0;
    for (std::size_t j = 0; j < t_row.size(); ++j) {
      if (j != top && t_row[j] > t_row[second]) second = j;
    }
    const auto inside = [&](double x) { return x > boundary_t && x < 1.0 - boundary_t; };
    if (inside(t_row[top]) && inside(t_row[second])) {
      v.kind = VerdictKind::Boundary;
      v.cluster = top;
      v.second = second;
      v.top_memberships = {t_row[top], t_row[second]};
      return v;
    }
  }
  v.kind = VerdictKind::Main;
  v.cluster = top;
  v.top_memberships = {t_row[top]};
  return v;
}

std::vector<PointVerdict> classify_points(const NsState& state, double boundary_t) {
  if (state.f_mem.size() != state.t_mem.rows()) {
    throw ShapeMismatch("noise memberships and membership matrix disagree on n");
  }
  std::vector<PointVerdict> out;
  out.reserve(state.t_mem.rows());
  for (std::size_t i = 0; i < state.t_mem.rows(); ++i) {
    out.push_back(classify_point(state.t_mem.row(i), state.f_mem[i], boundary_t));
  }
  return out;
}

std::vector<int> hard_labels(const Matrix& t_mem) {
  std::vector<int> out(t_mem.rows(), 0);
  for (std::size_t i = 0; i < t_mem.rows(); ++i) {
    const auto row = t_mem.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace nsclust
