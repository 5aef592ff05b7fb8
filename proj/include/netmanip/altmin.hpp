#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "netmanip/agents.hpp"
#include "netmanip/net.hpp"
#include "netmanip/orgs.hpp"
#include "netmanip/types.hpp"

namespace netmanip {

/// A full problem instance.  X0 defaults to the uniform matrix (1/n) e e^T.
struct Scenario {
  TransitionMatrix network;
  int horizon = 1;
  std::vector<AgentProfile> agents;
  std::vector<OrganizationProfile> orgs;
  double delta1 = 0.0;
  double delta2 = 0.0;
  ManipulationMatrix x0;
  int max_iters = 100;
  std::uint64_t seed = 0;

  Eigen::Index n() const { return network.n(); }
  Eigen::Index num_orgs() const { return static_cast<Eigen::Index>(orgs.size()); }
  Eigen::Index num_agents() const { return static_cast<Eigen::Index>(agents.size()); }
};

/// Checks dimensional consistency and all domain invariants; fills in the
/// default X0 when empty.  Throws DimensionMismatch / InvalidSimplex /
/// SingularNetwork.
void validate_scenario(Scenario& s);

/// The constants entering the convergence analysis:
///   sigma1 = min_k tau_k/eta_k * sigma_min(M)^{2t}   (X-block convexity)
///   sigma2 = min_i beta_i                            (P-block convexity)
///   L1 = sqrt(N) * sigma_max(M)^t, L2 = 1            (coupling Lipschitz)
///   lambda = L1^2 L2^2 / (sigma1 sigma2)             (contraction factor)
/// `stable` records the strict inequality lambda < 1.
struct ConvergenceConstants {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double L1 = 0.0;
  double L2 = 1.0;
  double lambda = 0.0;
  bool stable = false;
};

ConvergenceConstants constants(const Scenario& s);

/// Block norms of the analysis: ||X||_F = sqrt(sum_k ||x_k||_2^2),
/// ||P||_H = sqrt(sum_i ||p_i||_1^2) and its dual with the max norm.
double f_norm(const Matrix& x);
double h_norm(const Matrix& p);
double h_dual_norm(const Matrix& z);

/// Joint potential  Phi(X, P) = sum_i E_i*(p_i) + sum_k ( sum_i p_i^k g_i^k
/// - pi_k / eta_k ).  Evaluated both directly and through the decomposition
/// f(X) + <G(X), P> + h(P); the two must agree to 1e-10.
double potential(const Scenario& s, const ManipulationMatrix& x, const ChoiceMatrix& p);

/// Asymptotic distance radii of the inexact scheme,
///   X: sqrt(2 d2/sigma1) + L1 L2/sigma1 * sqrt(2 d1/sigma2)
///   P: sqrt(2 d1/sigma2) + L1 L2/sigma2 * sqrt(2 d2/sigma1).
std::pair<double, double> limit_radius(const ConvergenceConstants& c, double delta1,
                                       double delta2);

struct IterationRecord {
  int iter = 0;
  ManipulationMatrix x;
  ChoiceMatrix p;
  double phi = 0.0;
  double gap_p = 0.0;  // realized P-block certificate
  double gap_x = 0.0;  // realized X-block certificate (NaN on the initial row)
  // distances to the reference optimum and the theoretical bound curves;
  // NaN when no reference is available
  double dist_x = 0.0;
  double dist_p = 0.0;
  double bound_x = 0.0;
  double bound_p = 0.0;
};

struct RunTrace {
  std::vector<IterationRecord> iterations;
  ConvergenceConstants constants;
  bool inexact = false;
  double delta1 = 0.0;
  double delta2 = 0.0;
  bool has_reference = false;
  ManipulationMatrix x_star;
  ChoiceMatrix p_star;
  double dist_p1 = 0.0;  // ||P_1 - P*||_H with P_1 the exact first choice matrix
  bool stopped_on_stall = false;
  std::vector<std::string> warnings;
};

struct ReferenceOptimum {
  ManipulationMatrix x_star;
  ChoiceMatrix p_star;
  double block_gap = 0.0;  // certificate of the final X-step
};

struct RunOptions {
  /// Block certificate target for nominally exact solves (split across
  /// columns).  The per-column contract floor stays at 1e-8 unless a
  /// tighter reference-quality solve is requested here.
  double exact_block_gap = 1e-8;
  /// Outer stall tolerance ||X_{l+1} - X_l||_F for exact runs.
  double stall_tol = 1e-10;
  std::optional<ReferenceOptimum> reference;
  std::optional<int> max_iters;
};

/// Exact alternating minimization: P-step in closed form, X-step solved to
/// the exact-contract certificate.  Records a warning and proceeds when the
/// stability assumption fails.
RunTrace run_exact(const Scenario& s, const RunOptions& options = {});

/// Inexact alternating minimization: the P-step is degraded to a certified
/// delta1 gap, the X-step early-stops at a block certificate of delta2
/// (delta2/K per column).  With delta1 = delta2 = 0 the trace coincides
/// with run_exact.
RunTrace run_inexact(const Scenario& s, const RunOptions& options = {});

/// High-precision reference optimum: the exact scheme iterated with block
/// certificates <= block_gap until the iterates stall.  Requires a stable
/// scenario.
ReferenceOptimum reference_optimum(const Scenario& s, double block_gap = 1e-12);

/// Least-squares slope of log ||X_l - X*||_F per iteration, fitted over the
/// decaying part of the trace (rows above max(10 * final distance, 1e-12)).
/// Empty when fewer than three rows qualify or no reference was attached.
std::optional<double> fitted_decay_slope(const RunTrace& trace);

}  // namespace netmanip
