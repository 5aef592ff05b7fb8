#pragma once

#include <vector>

#include "netmanip/choice.hpp"
#include "netmanip/net.hpp"
#include "netmanip/types.hpp"

namespace netmanip {

/// An agent: the network state it aspires to and the random-utility model
/// it chooses organizations with.  Models may differ across agents.
struct AgentProfile {
  NetworkState aspired_state;
  ChoiceModel model;
};

/// Observed disutilities of agent i: component k is the Euclidean distance
/// between the aspired state and the state organization k produces after t
/// periods.
Vector distance_vector(const AgentProfile& agent, const ManipulationMatrix& x,
                       const TransitionMatrix& m, int t);

/// K x N matrix stacking distance_vector columns for all agents.  Entries
/// never exceed sqrt(2), the Euclidean diameter of the simplex.
Matrix distance_matrix(const std::vector<AgentProfile>& agents, const ManipulationMatrix& x,
                       const TransitionMatrix& m, int t);

/// Choice matrix P(X): column i solves agent i's rational inattention
/// problem at cost distance_vector(i).  Since the potential separates over
/// agents, this is the exact P-block minimizer.
ChoiceMatrix choice_matrix(const std::vector<AgentProfile>& agents, const ManipulationMatrix& x,
                           const TransitionMatrix& m, int t);

/// Frank-Wolfe gap of P for the P-block objective sum_i <g_i, p_i> + E_i*(p_i)
/// at fixed distances G.  The gap is additive over agents; per-agent gaps are
/// returned through `per_agent` when non-null.  Columns must be interior.
double p_block_gap(const ChoiceMatrix& p, const Matrix& distances,
                   const std::vector<AgentProfile>& agents, Vector* per_agent = nullptr);

struct PerturbResult {
  ChoiceMatrix p;
  double gap = 0.0;        // realized block certificate
  Vector agent_gaps;       // per-agent certificates
  bool reached_target = true;
};

/// Degrades the exact choice matrix to a controlled inexactness level: each
/// column is mixed with a vertex of the simplex, bisecting the mixing weight
/// until the per-agent Frank-Wolfe gap lands in [0.5, 1] * target/N, so the
/// block gap lands in [0.5, 1] * target.  target = 0 returns the input
/// unchanged.  If some column cannot reach its share of the gap the result
/// carries the maximal achievable value and reached_target = false.
PerturbResult perturb_to_delta(const ChoiceMatrix& exact, double target, const Matrix& distances,
                               const std::vector<AgentProfile>& agents);

}  // namespace netmanip
