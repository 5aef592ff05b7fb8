#include "netmanip/net.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace netmanip {

namespace {
constexpr double kColumnSumTol = 1e-12;    // invariant after renormalization
constexpr double kStateTol = 1e-10;        // simplex membership of states
constexpr double kSingularRelTol = 1e-13;  // sigma_min below this (relative) counts as zero
}  // namespace

TransitionMatrix::TransitionMatrix(Matrix raw, double tol) : m_(std::move(raw)) {
  if (m_.rows() != m_.cols())
    throw NonStochastic("transition matrix must be square, got " + std::to_string(m_.rows()) +
                        "x" + std::to_string(m_.cols()));
  if (m_.size() == 0) throw NonStochastic("transition matrix is empty");
  if (!m_.allFinite()) throw NonStochastic("transition matrix has non-finite entries");
  if (m_.minCoeff() < 0.0)
    throw NegativeEntry("transition matrix entry " + std::to_string(m_.minCoeff()) +
                        " is negative");
  for (Eigen::Index j = 0; j < m_.cols(); ++j) {
    const double s = m_.col(j).sum();
    if (std::abs(s - 1.0) > tol)
      throw NonStochastic("column " + std::to_string(j) + " sums to " + std::to_string(s));
    if (std::abs(s - 1.0) > kColumnSumTol) m_.col(j) /= s;
  }
  Eigen::JacobiSVD<Matrix> svd(m_);
  sigma_max_ = svd.singularValues()(0);
  sigma_min_ = svd.singularValues()(m_.rows() - 1);
}

bool TransitionMatrix::is_regular() const {
  return sigma_min_ > kSingularRelTol * std::max(1.0, sigma_max_);
}

double TransitionMatrix::condition_number() const {
  if (!is_regular())
    throw SingularNetwork("condition number undefined: smallest singular value is " +
                          std::to_string(sigma_min_));
  return sigma_max_ / sigma_min_;
}

Matrix TransitionMatrix::power(int t) const {
  if (t < 0) throw Error("negative matrix power");
  Matrix p = Matrix::Identity(n(), n());
  for (int i = 0; i < t; ++i) p = m_ * p;
  return p;
}

TransitionMatrix validate_stochastic(const Matrix& raw, double tol) {
  return TransitionMatrix(raw, tol);
}

NetworkState propagate(const TransitionMatrix& m, const NetworkState& x, int t) {
  if (x.size() != m.n())
    throw DimensionMismatch("state has dimension " + std::to_string(x.size()) + ", network has " +
                            std::to_string(m.n()) + " nodes");
  if (t < 0) throw Error("negative horizon");
  require_simplex(x, kStateTol, "network state");
  NetworkState y = x;
  for (int i = 0; i < t; ++i) y = m.matrix() * y;
  return y;
}

ManipulationMatrix propagate_matrix(const TransitionMatrix& m, const ManipulationMatrix& x, int t) {
  ManipulationMatrix out(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k) out.col(k) = propagate(m, x.col(k), t);
  return out;
}

Matrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matrix file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(path + ":" + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": empty matrix");
  Matrix m(rows.size(), rows.front().size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

TransitionMatrix load_transition_matrix_csv(const std::string& path, double tol) {
  return TransitionMatrix(load_matrix_csv(path), tol);
}

}  // namespace netmanip
