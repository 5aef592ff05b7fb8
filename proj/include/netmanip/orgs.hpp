#pragma once

#include <vector>

#include "netmanip/agents.hpp"
#include "netmanip/net.hpp"
#include "netmanip/types.hpp"

namespace netmanip {

/// An organization: payoff-importance weight eta, payoff strong-concavity
/// parameter tau, and the network state the payoff tracks.  The canonical
/// payoff is the quadratic -(tau/2) ||y - anchor||^2, which realizes the
/// concavity assumption with equality; value/gradient/concavity below form
/// the seam other payoffs would implement.
struct OrganizationProfile {
  double eta = 1.0;
  double tau = 1.0;
  NetworkState anchor;
};

/// Payoff at resulting state y: -(tau/2) ||y - anchor||^2.
double payoff(const OrganizationProfile& org, const NetworkState& y);

/// Gradient of the payoff at y: -tau (y - anchor).
Vector payoff_gradient(const OrganizationProfile& org, const NetworkState& y);

/// Organization k's objective at starting distribution x, given the agents'
/// probabilities p_row of choosing k:
///   sum_i p_row[i] ||v_i - M^t x||_2 + (tau / (2 eta)) ||M^t x - anchor||^2.
double org_objective(const OrganizationProfile& org, const Vector& x, const Vector& p_row,
                     const std::vector<AgentProfile>& agents, const TransitionMatrix& m, int t);

/// Witness of delta-inexactness: a valid subgradient g at the candidate and
/// its Frank-Wolfe gap over the simplex, max_y <g, x - y> = <g, x> - min_j g_j.
/// By convexity the gap bounds the suboptimality of the candidate.
struct DeltaCertificate {
  double gap = 0.0;
  Vector subgradient;
};

struct OrgSolution {
  Vector x;
  DeltaCertificate certificate;
  int iterations = 0;
};

struct OrgSolveOptions {
  const Vector* warm_start = nullptr;
  /// Certificate target used when delta2 == 0 (the exact-solve contract).
  double gap_floor = 1e-8;
  int subgradient_iterations = 150;
  int newton_iterations = 600;
};

/// Solves min over the simplex of org_objective to a certified accuracy:
/// the returned certificate gap is at most max(delta2, gap_floor).  The
/// objective is nonsmooth (a weighted sum of Euclidean distances) but
/// strongly convex; a projected-subgradient phase globalizes and a smoothed
/// active-set Newton phase with exact kink handling drives the certificate
/// down.  Raises NonConvergence with the best gap if the budget runs out.
OrgSolution solve_org_subproblem(const OrganizationProfile& org, const Vector& p_row,
                                 const std::vector<AgentProfile>& agents,
                                 const TransitionMatrix& m, int t, double delta2,
                                 const OrgSolveOptions& options = {});

struct BlockSolution {
  ManipulationMatrix x;
  std::vector<DeltaCertificate> columns;
  /// Block certificate: the Frank-Wolfe gap over the product of simplices is
  /// the sum of the column gaps.
  double gap = 0.0;
};

/// Columnwise subproblem solves; the potential separates over organizations,
/// so this is the (delta-inexact) X-block minimizer.  delta2 applies per
/// column; the block certificate is therefore at most K * delta2.  A warm
/// start supplies one starting point per column.
BlockSolution manipulation_matrix(const std::vector<OrganizationProfile>& orgs,
                                  const ChoiceMatrix& p, const std::vector<AgentProfile>& agents,
                                  const TransitionMatrix& m, int t, double delta2,
                                  const OrgSolveOptions& options = {},
                                  const ManipulationMatrix* warm_start = nullptr);

}  // namespace netmanip
