#include "netmanip/agents.hpp"

#include <cmath>

#include "netmanip/parallel.hpp"

namespace netmanip {

namespace {

constexpr double kColumnTol = 1e-10;

void require_instance(const std::vector<AgentProfile>& agents, const ManipulationMatrix& x,
                      const TransitionMatrix& m) {
  if (agents.empty()) throw DimensionMismatch("no agents");
  if (x.rows() != m.n())
    throw DimensionMismatch("manipulation matrix has " + std::to_string(x.rows()) +
                            " rows, network has " + std::to_string(m.n()) + " nodes");
  const int k = static_cast<int>(x.cols());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].aspired_state.size() != m.n())
      throw DimensionMismatch("agent " + std::to_string(i) + " aspired state has wrong size");
    if (agents[i].model.alternatives() != k)
      throw DimensionMismatch("agent " + std::to_string(i) + " chooses among " +
                              std::to_string(agents[i].model.alternatives()) +
                              " alternatives, but there are " + std::to_string(k) +
                              " organizations");
  }
}

// FW gap over the simplex for gradient g at p: <g, p> - min_j g_j.
double simplex_gap(const Vector& g, const Vector& p) { return g.dot(p) - g.minCoeff(); }

double agent_gap(const AgentProfile& agent, const Vector& cost, const Vector& p) {
  return simplex_gap(cost + conjugate_gradient(agent.model, p), p);
}

}  // namespace

Vector distance_vector(const AgentProfile& agent, const ManipulationMatrix& x,
                       const TransitionMatrix& m, int t) {
  if (agent.aspired_state.size() != m.n() || x.rows() != m.n())
    throw DimensionMismatch("distance_vector: inconsistent dimensions");
  Vector g(x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k)
    g[k] = (agent.aspired_state - propagate(m, x.col(k), t)).norm();
  return g;
}

Matrix distance_matrix(const std::vector<AgentProfile>& agents, const ManipulationMatrix& x,
                       const TransitionMatrix& m, int t) {
  require_instance(agents, x, m);
  Matrix g(x.cols(), static_cast<Eigen::Index>(agents.size()));
  parallel_for(agents.size(), [&](std::size_t i) {
    g.col(static_cast<Eigen::Index>(i)) = distance_vector(agents[i], x, m, t);
  });
  return g;
}

ChoiceMatrix choice_matrix(const std::vector<AgentProfile>& agents, const ManipulationMatrix& x,
                           const TransitionMatrix& m, int t) {
  require_instance(agents, x, m);
  ChoiceMatrix p(x.cols(), static_cast<Eigen::Index>(agents.size()));
  parallel_for(agents.size(), [&](std::size_t i) {
    const Vector g = distance_vector(agents[i], x, m, t);
    p.col(static_cast<Eigen::Index>(i)) = rational_inattention_solve(agents[i].model, g);
  });
  return p;
}

double p_block_gap(const ChoiceMatrix& p, const Matrix& distances,
                   const std::vector<AgentProfile>& agents, Vector* per_agent) {
  const Eigen::Index n = static_cast<Eigen::Index>(agents.size());
  if (p.cols() != n || distances.cols() != n || p.rows() != distances.rows())
    throw DimensionMismatch("p_block_gap: inconsistent dimensions");
  Vector gaps(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    require_simplex(p.col(i), kColumnTol, "choice matrix column " + std::to_string(i));
    gaps[i] = agent_gap(agents[static_cast<std::size_t>(i)], distances.col(i), p.col(i));
  }
  if (per_agent != nullptr) *per_agent = gaps;
  return gaps.sum();
}

PerturbResult perturb_to_delta(const ChoiceMatrix& exact, double target, const Matrix& distances,
                               const std::vector<AgentProfile>& agents) {
  if (target < 0.0) throw Error("perturbation target must be nonnegative");
  PerturbResult result;
  result.p = exact;
  result.agent_gaps.resize(static_cast<Eigen::Index>(agents.size()));
  if (target == 0.0) {
    result.gap = p_block_gap(exact, distances, agents, &result.agent_gaps);
    return result;
  }

  const double per_agent_target = target / static_cast<double>(agents.size());
  const double lo_band = 0.5 * per_agent_target;
  bool all_reached = true;

  for (std::size_t i = 0; i < agents.size(); ++i) {
    const Eigen::Index col = static_cast<Eigen::Index>(i);
    const Vector& cost = distances.col(col);
    const Vector p_exact = exact.col(col);
    Vector vertex = Vector::Zero(p_exact.size());
    Eigen::Index worst = 0;
    cost.maxCoeff(&worst);
    vertex[worst] = 1.0;

    auto gap_at = [&](double alpha) {
      const Vector mixed = (1.0 - alpha) * p_exact + alpha * vertex;
      return agent_gap(agents[i], cost, mixed);
    };

    // expand until the gap covers the band, then bisect into it
    constexpr double kAlphaCap = 1.0 - 1e-9;
    double hi = 0.5;
    while (gap_at(hi) < per_agent_target && hi < kAlphaCap) hi = 0.5 * (hi + 1.0);
    double lo = 0.0;
    double alpha = hi;
    double gap = gap_at(alpha);
    for (int it = 0; it < 200 && (gap < lo_band || gap > per_agent_target); ++it) {
      alpha = 0.5 * (lo + hi);
      gap = gap_at(alpha);
      if (gap > per_agent_target)
        hi = alpha;
      else if (gap < lo_band)
        lo = alpha;
    }
    if (gap < lo_band || gap > per_agent_target) {
      // fall back to the best achievable gap below the band ceiling
      alpha = gap > per_agent_target ? lo : hi;
      gap = gap_at(alpha);
      all_reached = false;
    }
    result.p.col(col) = (1.0 - alpha) * p_exact + alpha * vertex;
    result.agent_gaps[col] = gap;
  }
  result.gap = result.agent_gaps.sum();
  result.reached_target = all_reached && result.gap >= 0.5 * target && result.gap <= target;
  return result;
}

}  // namespace netmanip
