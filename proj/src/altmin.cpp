#include "netmanip/altmin.hpp"

#include <cmath>
#include <limits>

#include "netmanip/choice.hpp"

namespace netmanip {

namespace {

constexpr double kStateTol = 1e-10;
constexpr double kDecompositionTol = 1e-10;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_consistent(const Scenario& s) {
  if (s.agents.empty()) throw DimensionMismatch("scenario has no agents");
  if (s.orgs.empty()) throw DimensionMismatch("scenario has no organizations");
  if (s.horizon < 1) throw DimensionMismatch("horizon must be a positive integer");
  if (s.delta1 < 0.0 || s.delta2 < 0.0) throw DimensionMismatch("deltas must be nonnegative");
  if (s.max_iters < 1) throw DimensionMismatch("max_iters must be positive");
  const Eigen::Index n = s.n();
  const int k = static_cast<int>(s.orgs.size());
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    if (s.agents[i].aspired_state.size() != n)
      throw DimensionMismatch("agent " + std::to_string(i) + " aspired state has size " +
                              std::to_string(s.agents[i].aspired_state.size()) +
                              ", network has " + std::to_string(n) + " nodes");
    require_simplex(s.agents[i].aspired_state, kStateTol,
                    "agent " + std::to_string(i) + " aspired state");
    if (s.agents[i].model.alternatives() != k)
      throw DimensionMismatch("agent " + std::to_string(i) + " model has " +
                              std::to_string(s.agents[i].model.alternatives()) +
                              " alternatives, scenario has " + std::to_string(k) +
                              " organizations");
  }
  for (std::size_t j = 0; j < s.orgs.size(); ++j) {
    if (s.orgs[j].anchor.size() != n)
      throw DimensionMismatch("organization " + std::to_string(j) + " anchor has wrong size");
    require_simplex(s.orgs[j].anchor, kStateTol, "organization " + std::to_string(j) + " anchor");
    if (!(s.orgs[j].eta > 0.0))
      throw DimensionMismatch("organization " + std::to_string(j) + " needs eta > 0");
    if (!(s.orgs[j].tau > 0.0))
      throw DimensionMismatch("organization " + std::to_string(j) + " needs tau > 0");
  }
}

}  // namespace

void validate_scenario(Scenario& s) {
  require_consistent(s);
  if (!s.network.is_regular())
    throw SingularNetwork("network transition matrix is singular; the scheme's constants are "
                          "undefined");
  if (s.x0.size() == 0)
    s.x0 = ManipulationMatrix::Constant(s.n(), s.num_orgs(), 1.0 / static_cast<double>(s.n()));
  if (s.x0.rows() != s.n() || s.x0.cols() != s.num_orgs())
    throw DimensionMismatch("x0 must be n x K");
  require_simplex_columns(s.x0, kStateTol, "x0");
}

ConvergenceConstants constants(const Scenario& s) {
  require_consistent(s);
  if (!s.network.is_regular())
    throw SingularNetwork("constants undefined: smallest singular value of the network is zero");
  ConvergenceConstants c;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& org : s.orgs) min_ratio = std::min(min_ratio, org.tau / org.eta);
  double min_beta = std::numeric_limits<double>::infinity();
  for (const auto& agent : s.agents) min_beta = std::min(min_beta, convexity_parameter(agent.model));
  const double smin_t = std::pow(s.network.sigma_min(), s.horizon);
  const double smax_t = std::pow(s.network.sigma_max(), s.horizon);
  c.sigma1 = min_ratio * smin_t * smin_t;
  c.sigma2 = min_beta;
  c.L1 = std::sqrt(static_cast<double>(s.agents.size())) * smax_t;
  c.L2 = 1.0;
  c.lambda = (c.L1 * c.L1 * c.L2 * c.L2) / (c.sigma1 * c.sigma2);
  c.stable = c.lambda < 1.0;
  return c;
}

double f_norm(const Matrix& x) { return x.norm(); }

double h_norm(const Matrix& p) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.cols(); ++i) {
    const double l1 = p.col(i).lpNorm<1>();
    acc += l1 * l1;
  }
  return std::sqrt(acc);
}

double h_dual_norm(const Matrix& z) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    const double linf = z.col(i).lpNorm<Eigen::Infinity>();
    acc += linf * linf;
  }
  return std::sqrt(acc);
}

double potential(const Scenario& s, const ManipulationMatrix& x, const ChoiceMatrix& p) {
  require_consistent(s);
  if (x.rows() != s.n() || x.cols() != s.num_orgs())
    throw DimensionMismatch("potential: X must be n x K");
  if (p.rows() != s.num_orgs() || p.cols() != s.num_agents())
    throw DimensionMismatch("potential: P must be K x N");
  require_simplex_columns(x, kStateTol, "manipulation matrix");
  require_simplex_columns(p, kStateTol, "choice matrix");

  const Matrix g = distance_matrix(s.agents, x, s.network, s.horizon);

  // direct form: conjugates plus the organizations' objective terms
  double direct = 0.0;
  for (Eigen::Index i = 0; i < s.num_agents(); ++i)
    direct += conjugate(s.agents[static_cast<std::size_t>(i)].model, p.col(i));
  for (Eigen::Index k = 0; k < s.num_orgs(); ++k) {
    const auto& org = s.orgs[static_cast<std::size_t>(k)];
    const NetworkState y = propagate(s.network, x.col(k), s.horizon);
    double weighted = 0.0;
    for (Eigen::Index i = 0; i < s.num_agents(); ++i) weighted += p(k, i) * g(k, i);
    direct += weighted - payoff(org, y) / org.eta;
  }

  // decomposition: f(X) + <G(X), P> + h(P)
  double f_val = 0.0;
  for (Eigen::Index k = 0; k < s.num_orgs(); ++k) {
    const auto& org = s.orgs[static_cast<std::size_t>(k)];
    const NetworkState y = propagate(s.network, x.col(k), s.horizon);
    f_val -= payoff(org, y) / org.eta;
  }
  double h_val = 0.0;
  for (Eigen::Index i = 0; i < s.num_agents(); ++i)
    h_val += conjugate(s.agents[static_cast<std::size_t>(i)].model, p.col(i));
  const double decomposed = f_val + (g.array() * p.array()).sum() + h_val;

  if (std::abs(direct - decomposed) > kDecompositionTol * (1.0 + std::abs(direct)))
    throw Error("potential decomposition mismatch: " + std::to_string(direct) + " vs " +
                std::to_string(decomposed));
  return direct;
}

std::pair<double, double> limit_radius(const ConvergenceConstants& c, double delta1,
                                       double delta2) {
  if (delta1 < 0.0 || delta2 < 0.0) throw Error("deltas must be nonnegative");
  const double p_step = std::sqrt(2.0 * delta1 / c.sigma2);
  const double x_step = std::sqrt(2.0 * delta2 / c.sigma1);
  const double coupling = c.L1 * c.L2;
  return {x_step + coupling / c.sigma1 * p_step, p_step + coupling / c.sigma2 * x_step};
}

namespace {

struct BoundCurves {
  bool enabled = false;
  double dist_x0 = 0.0;  // ||X_0 - X*||_F
  double dist_p1 = 0.0;  // ||P_1 - P*||_H, exact first choice matrix
  double radius_x = 0.0;
  double radius_p = 0.0;
  double sqrt_d1 = 0.0;  // sqrt(2 delta1 / sigma2)
  double lambda = 0.0;
};

RunTrace run_scheme(const Scenario& s, const RunOptions& options, bool inexact) {
  Scenario scenario = s;  // local copy so defaults can be filled
  validate_scenario(scenario);
  const double delta1 = inexact ? scenario.delta1 : 0.0;
  const double delta2 = inexact ? scenario.delta2 : 0.0;

  RunTrace trace;
  trace.inexact = inexact;
  trace.delta1 = delta1;
  trace.delta2 = delta2;
  trace.constants = constants(scenario);
  if (!trace.constants.stable)
    trace.warnings.push_back(
        "stability assumption violated (lambda = " + std::to_string(trace.constants.lambda) +
        " >= 1); bounds are not checked");

  const int max_iters = options.max_iters.value_or(scenario.max_iters);
  const Eigen::Index k = scenario.num_orgs();

  // the exact first choice matrix enters the P-side bound even in inexact runs
  const ChoiceMatrix p1_exact =
      choice_matrix(scenario.agents, scenario.x0, scenario.network, scenario.horizon);

  BoundCurves bounds;
  if (options.reference.has_value()) {
    trace.has_reference = true;
    trace.x_star = options.reference->x_star;
    trace.p_star = options.reference->p_star;
    trace.dist_p1 = h_norm(p1_exact - trace.p_star);
    if (trace.constants.stable) {
      bounds.enabled = true;
      bounds.dist_x0 = f_norm(scenario.x0 - trace.x_star);
      bounds.dist_p1 = trace.dist_p1;
      const auto radii = limit_radius(trace.constants, delta1, delta2);
      bounds.radius_x = radii.first;
      bounds.radius_p = radii.second;
      bounds.sqrt_d1 = std::sqrt(2.0 * delta1 / trace.constants.sigma2);
      bounds.lambda = trace.constants.lambda;
    }
  }

  auto record = [&](int iter, const ManipulationMatrix& x, const ChoiceMatrix& p, double gap_p,
                    double gap_x) {
    IterationRecord rec;
    rec.iter = iter;
    rec.x = x;
    rec.p = p;
    rec.phi = potential(scenario, x, p);
    rec.gap_p = gap_p;
    rec.gap_x = gap_x;
    rec.dist_x = trace.has_reference ? f_norm(x - trace.x_star) : kNaN;
    rec.dist_p = trace.has_reference ? h_norm(p - trace.p_star) : kNaN;
    rec.bound_x = kNaN;
    rec.bound_p = kNaN;
    if (bounds.enabled) {
      rec.bound_x = std::pow(bounds.lambda, iter) * bounds.dist_x0 + bounds.radius_x;
      if (iter >= 1)
        rec.bound_p = std::pow(bounds.lambda, iter - 1) * (bounds.dist_p1 + bounds.sqrt_d1) +
                      bounds.radius_p;
    }
    trace.iterations.push_back(std::move(rec));
  };

  // row 0 pairs the initial X with the exact choice matrix at X_0
  {
    Vector agent_gaps;
    const Matrix g0 =
        distance_matrix(scenario.agents, scenario.x0, scenario.network, scenario.horizon);
    const double gap_p0 = p_block_gap(p1_exact, g0, scenario.agents, &agent_gaps);
    record(0, scenario.x0, p1_exact, gap_p0, kNaN);
  }

  OrgSolveOptions column_options;
  column_options.gap_floor = options.exact_block_gap / static_cast<double>(k);
  const double column_delta = delta2 / static_cast<double>(k);

  ManipulationMatrix x = scenario.x0;
  for (int iter = 1; iter <= max_iters; ++iter) {
    const Matrix g = distance_matrix(scenario.agents, x, scenario.network, scenario.horizon);
    const ChoiceMatrix p_exact =
        iter == 1 ? p1_exact : choice_matrix(scenario.agents, x, scenario.network, scenario.horizon);

    ChoiceMatrix p = p_exact;
    double gap_p = 0.0;
    if (delta1 > 0.0) {
      PerturbResult perturbed = perturb_to_delta(p_exact, delta1, g, scenario.agents);
      if (!perturbed.reached_target)
        trace.warnings.push_back("iteration " + std::to_string(iter) +
                                 ": perturbation fell short of the requested gap band");
      p = std::move(perturbed.p);
      gap_p = perturbed.gap;
    } else {
      gap_p = p_block_gap(p_exact, g, scenario.agents, nullptr);
    }

    BlockSolution block = manipulation_matrix(scenario.orgs, p, scenario.agents, scenario.network,
                                              scenario.horizon, column_delta, column_options, &x);
    const double step = f_norm(block.x - x);
    x = block.x;
    record(iter, x, p, gap_p, block.gap);

    const bool effectively_exact = delta1 == 0.0 && delta2 == 0.0;
    if (effectively_exact && step <= options.stall_tol) {
      trace.stopped_on_stall = true;
      break;
    }
  }
  return trace;
}

}  // namespace

RunTrace run_exact(const Scenario& s, const RunOptions& options) {
  return run_scheme(s, options, false);
}

RunTrace run_inexact(const Scenario& s, const RunOptions& options) {
  return run_scheme(s, options, true);
}

ReferenceOptimum reference_optimum(const Scenario& s, double block_gap) {
  Scenario scenario = s;
  validate_scenario(scenario);
  const ConvergenceConstants c = constants(scenario);
  if (!c.stable)
    throw Error("reference optimum requires a stable scenario (lambda = " +
                std::to_string(c.lambda) + ")");
  // iteration budget from the contraction factor, with a stall exit
  const double per_iter = -std::log(c.lambda);
  const int budget =
      static_cast<int>(std::min(100000.0, 10.0 * std::ceil(-std::log(1e-12) / per_iter)));

  RunOptions options;
  options.exact_block_gap = block_gap;
  options.stall_tol = 1e-15;
  options.max_iters = std::max(budget, 10);

  Scenario exact = scenario;
  exact.delta1 = 0.0;
  exact.delta2 = 0.0;
  const RunTrace trace = run_exact(exact, options);

  ReferenceOptimum ref;
  ref.x_star = trace.iterations.back().x;
  ref.p_star = choice_matrix(scenario.agents, ref.x_star, scenario.network, scenario.horizon);
  ref.block_gap = trace.iterations.back().gap_x;
  return ref;
}

std::optional<double> fitted_decay_slope(const RunTrace& trace) {
  if (!trace.has_reference || trace.iterations.empty()) return std::nullopt;
  const double final_dist = trace.iterations.back().dist_x;
  const double floor = std::max(10.0 * final_dist, 1e-12);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (const auto& rec : trace.iterations) {
    if (!std::isfinite(rec.dist_x) || rec.dist_x < floor) continue;
    const double xi = static_cast<double>(rec.iter);
    const double yi = std::log(rec.dist_x);
    sx += xi;
    sy += yi;
    sxx += xi * xi;
    sxy += xi * yi;
    ++count;
  }
  if (count < 3) return std::nullopt;
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (count * sxy - sx * sy) / denom;
}

}  // namespace netmanip
