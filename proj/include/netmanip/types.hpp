#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace netmanip {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A network state lives on the standard simplex of R^n; a manipulation
// matrix stacks K such states columnwise, a choice matrix stacks N points
// of the K-simplex columnwise.  They are plain dense types; feasibility is
// enforced at operation boundaries via the helpers below.
using NetworkState = Vector;
using ChoiceProbabilities = Vector;
using ManipulationMatrix = Matrix;
using ChoiceMatrix = Matrix;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonStochastic : Error {
  using Error::Error;
};
struct NegativeEntry : Error {
  using Error::Error;
};
struct SingularNetwork : Error {
  using Error::Error;
};
struct InvalidSimplex : Error {
  using Error::Error;
};
struct InvalidModel : Error {
  using Error::Error;
};
struct MissingPair : Error {
  using Error::Error;
};
struct NonConvergence : Error {
  double best_gap;
  NonConvergence(const std::string& what, double gap) : Error(what), best_gap(gap) {}
};
struct GridTooLarge : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};

/// True iff v is nonnegative and sums to one within tol.
bool is_simplex_point(const Vector& v, double tol);

/// Throws InvalidSimplex with `label` in the message otherwise.
void require_simplex(const Vector& v, double tol, const std::string& label);

/// Columnwise require_simplex.
void require_simplex_columns(const Matrix& m, double tol, const std::string& label);

/// Euclidean projection onto the standard simplex (sorting algorithm,
/// O(n log n), exact up to floating point).
Vector project_to_simplex(const Vector& v);

}  // namespace netmanip
