#include "netmanip/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace netmanip {

bool is_simplex_point(const Vector& v, double tol) {
  if (v.size() == 0) return false;
  if (!v.allFinite()) return false;
  if (v.minCoeff() < -tol) return false;
  return std::abs(v.sum() - 1.0) <= tol;
}

void require_simplex(const Vector& v, double tol, const std::string& label) {
  if (v.size() == 0) throw InvalidSimplex(label + ": empty vector");
  if (!v.allFinite()) throw InvalidSimplex(label + ": non-finite entry");
  if (v.minCoeff() < -tol)
    throw InvalidSimplex(label + ": negative entry " + std::to_string(v.minCoeff()));
  double s = v.sum();
  if (std::abs(s - 1.0) > tol)
    throw InvalidSimplex(label + ": coordinates sum to " + std::to_string(s));
}

void require_simplex_columns(const Matrix& m, double tol, const std::string& label) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    require_simplex(m.col(j), tol, label + ", column " + std::to_string(j));
}

Vector project_to_simplex(const Vector& v) {
  const Eigen::Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    css += u[j];
    double t = (css - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0);
}

}  // namespace netmanip
