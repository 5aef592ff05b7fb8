#pragma once

#include <string>

#include "netmanip/types.hpp"

namespace netmanip {

/// Column-stochastic transition matrix of an interaction network together
/// with its spectral data.  Entry (i, j) is the transition probability from
/// node j to node i, so every column sums to one.  The singular values are
/// computed once at construction (full SVD; networks are desk scale) and
/// feed all convergence constants downstream.
class TransitionMatrix {
 public:
  /// Validates and takes ownership of `raw`.  Columns whose sums deviate
  /// from one by at most `tol` are renormalized; larger deviations raise
  /// NonStochastic.  Any negative entry raises NegativeEntry.
  explicit TransitionMatrix(Matrix raw, double tol = 1e-9);

  const Matrix& matrix() const { return m_; }
  Eigen::Index n() const { return m_.rows(); }
  double sigma_min() const { return sigma_min_; }
  double sigma_max() const { return sigma_max_; }

  /// False when the smallest singular value is numerically zero; most of
  /// the convergence machinery requires a regular network.
  bool is_regular() const;

  /// sigma_max / sigma_min; raises SingularNetwork on irregular networks.
  double condition_number() const;

  /// M^t by repeated multiplication (t is small by assumption).
  Matrix power(int t) const;

 private:
  Matrix m_;
  double sigma_min_ = 0.0;
  double sigma_max_ = 0.0;
};

/// Checked constructor mirroring the matrix validation contract.
TransitionMatrix validate_stochastic(const Matrix& raw, double tol = 1e-9);

/// State after t interaction periods, M^t * x.  The input must lie on the
/// simplex (tolerance 1e-10); column stochasticity keeps the output there.
NetworkState propagate(const TransitionMatrix& m, const NetworkState& x, int t);

/// Columnwise propagate: M^t * X for a matrix of starting distributions.
ManipulationMatrix propagate_matrix(const TransitionMatrix& m, const ManipulationMatrix& x, int t);

/// Reads a header-free row-major CSV matrix (decimal reals) and validates
/// it as a transition matrix.
TransitionMatrix load_transition_matrix_csv(const std::string& path, double tol = 1e-9);

/// Reads a header-free row-major CSV matrix without validation.
Matrix load_matrix_csv(const std::string& path);

}  // namespace netmanip
