#include "netmanip/orgs.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "netmanip/parallel.hpp"

namespace netmanip {

namespace {

constexpr double kStateTol = 1e-10;
// Distance terms with residuals below this are treated as kinks and
// contribute the zero subgradient.  The induced certificate error is far
// below the gap resolution of the solver.
constexpr double kKinkZero = 1e-12;

void require_org(const OrganizationProfile& org, Eigen::Index n) {
  if (!(org.eta > 0.0)) throw Error("organization eta must be positive");
  if (!(org.tau > 0.0)) throw Error("organization tau must be positive");
  if (org.anchor.size() != n) throw DimensionMismatch("organization anchor has wrong size");
  require_simplex(org.anchor, kStateTol, "organization anchor");
}

// Strongly convex simplex-constrained column problem
//   F(x) = sum_i c_i ||A x - v_i||_2 + (rho/2) ||A x - w||^2.
struct Subproblem {
  Matrix A;      // M^t
  Matrix V;      // n x N aspired states
  Vector c;      // agent weights, nonnegative
  Vector w;      // payoff anchor
  double rho;    // tau / eta
  double sigma;  // strong convexity: rho * sigma_min(A)^2

  Eigen::Index n() const { return A.rows(); }

  double value(const Vector& x) const {
    const Vector y = A * x;
    double f = 0.5 * rho * (y - w).squaredNorm();
    for (Eigen::Index i = 0; i < V.cols(); ++i) f += c[i] * (y - V.col(i)).norm();
    return f;
  }

  Vector subgradient(const Vector& x) const {
    const Vector y = A * x;
    Vector s = rho * (y - w);
    for (Eigen::Index i = 0; i < V.cols(); ++i) {
      const Vector r = y - V.col(i);
      const double nr = r.norm();
      if (nr > kKinkZero && c[i] > 0.0) s += (c[i] / nr) * r;
    }
    return A.transpose() * s;
  }

  static double fw_gap(const Vector& g, const Vector& x) { return g.dot(x) - g.minCoeff(); }

  double value_smoothed(const Vector& x, double eps) const {
    const Vector y = A * x;
    double f = 0.5 * rho * (y - w).squaredNorm();
    for (Eigen::Index i = 0; i < V.cols(); ++i) {
      const double r2 = (y - V.col(i)).squaredNorm();
      f += c[i] * (std::sqrt(r2 + eps * eps) - eps);
    }
    return f;
  }

  void derivatives_smoothed(const Vector& x, double eps, Vector& grad, Matrix& hess) const {
    const Vector y = A * x;
    Vector inner_g = rho * (y - w);
    Matrix inner_h = rho * Matrix::Identity(n(), n());
    for (Eigen::Index i = 0; i < V.cols(); ++i) {
      if (c[i] <= 0.0) continue;
      const Vector r = y - V.col(i);
      const double s = std::sqrt(r.squaredNorm() + eps * eps);
      inner_g += (c[i] / s) * r;
      inner_h += (c[i] / s) * (Matrix::Identity(n(), n()) - (r * r.transpose()) / (s * s));
    }
    grad = A.transpose() * inner_g;
    hess = A.transpose() * inner_h * A;
  }

  // residual of the closest distance term with positive weight
  double nearest_kink(const Vector& x, Eigen::Index* which) const {
    const Vector y = A * x;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < V.cols(); ++i) {
      if (c[i] <= 0.0) continue;
      const double nr = (y - V.col(i)).norm();
      if (nr < best) {
        best = nr;
        if (which != nullptr) *which = i;
      }
    }
    return best;
  }
};

class ColumnSolver {
 public:
  ColumnSolver(const Subproblem& sp, double target, const OrgSolveOptions& options)
      : sp_(sp), target_(target), options_(options) {}

  OrgSolution solve(Vector x0) {
    x0 = project_to_simplex(x0);
    best_value_x_ = x0;
    best_value_ = sp_.value(x0);
    if (!consider_natural(x0)) {
      Vector x = phase_subgradient(x0);
      if (best_gap_ > target_) phase_newton(x);
    }
    if (best_gap_ > target_)
      throw NonConvergence("subproblem certificate target " + std::to_string(target_) +
                               " not reached; best Frank-Wolfe gap " + std::to_string(best_gap_),
                           best_gap_);
    OrgSolution sol;
    sol.x = best_x_;
    sol.certificate.gap = best_gap_;
    sol.certificate.subgradient = best_g_;
    sol.iterations = iterations_;
    return sol;
  }

 private:
  // track the candidate; true once the certificate target is met
  bool consider(const Vector& x, const Vector& g, double gap) {
    const double value = sp_.value(x);
    if (value < best_value_) {
      best_value_ = value;
      best_value_x_ = x;
    }
    if (gap < best_gap_) {
      best_gap_ = gap;
      best_x_ = x;
      best_g_ = g;
    }
    return best_gap_ <= target_;
  }

  bool consider_natural(const Vector& x) {
    const Vector g = sp_.subgradient(x);
    return consider(x, g, Subproblem::fw_gap(g, x));
  }

  // Projected subgradient with the step rule 1/(sigma l), capped at a
  // simplex-diameter step.  Globalizes cheaply; the polish happens later.
  Vector phase_subgradient(Vector x) {
    for (int l = 1; l <= options_.subgradient_iterations; ++l) {
      ++iterations_;
      const Vector g = sp_.subgradient(x);
      const double gnorm = g.norm();
      if (gnorm == 0.0) break;
      double step = std::sqrt(2.0) / gnorm;
      if (sp_.sigma > 0.0) step = std::min(step, 1.0 / (sp_.sigma * static_cast<double>(l)));
      x = project_to_simplex(x - step * g);
      if (consider_natural(x)) break;
    }
    return best_value_x_;
  }

  // Smoothed active-set Newton homotopy with exact kink handling.
  void phase_newton(Vector x) {
    static constexpr double kEps[] = {1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-14, 1e-16};
    int budget = options_.newton_iterations;
    for (double eps : kEps) {
      if (budget <= 0 || best_gap_ <= target_) return;
      budget -= newton_stage(x, eps, budget);
      Eigen::Index kink_index = 0;
      const double kink_dist = sp_.nearest_kink(x, &kink_index);
      if (kink_dist < std::max(100.0 * eps, 1e-7) && try_kink(kink_index)) return;
    }
    Eigen::Index kink_index = 0;
    if (sp_.nearest_kink(x, &kink_index) < 1e-4) try_kink(kink_index);
  }

  // Newton iterations at fixed smoothing; returns iterations consumed.
  int newton_stage(Vector& x, double eps, int budget) {
    const Eigen::Index n = sp_.n();
    Vector grad(n);
    Matrix hess(n, n);
    std::vector<bool> active(static_cast<std::size_t>(n), false);
    int releases = 0;
    int used = 0;

    while (used < budget) {
      ++used;
      ++iterations_;
      if (consider_natural(x)) return used;
      sp_.derivatives_smoothed(x, eps, grad, hess);

      std::vector<Eigen::Index> free;
      for (Eigen::Index j = 0; j < n; ++j) {
        active[static_cast<std::size_t>(j)] = x[j] <= 1e-14;
        if (!active[static_cast<std::size_t>(j)]) free.push_back(j);
      }
      const Eigen::Index m = static_cast<Eigen::Index>(free.size());
      if (m == 0) return used;

      // Newton step on the affine slice {sum x_f = const, x_active = 0},
      // null-space basis Z = [I; -1^T].
      Vector d = Vector::Zero(n);
      double nu = grad[free.back()];
      if (m > 1) {
        Matrix hz(m - 1, m - 1);
        Vector rhs(m - 1);
        const Eigen::Index last = free.back();
        for (Eigen::Index a = 0; a < m - 1; ++a) {
          rhs[a] = -(grad[free[static_cast<std::size_t>(a)]] - grad[last]);
          for (Eigen::Index b = 0; b < m - 1; ++b) {
            hz(a, b) = hess(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]) -
                       hess(free[static_cast<std::size_t>(a)], last) -
                       hess(last, free[static_cast<std::size_t>(b)]) + hess(last, last);
          }
        }
        double damping = 0.0;
        Vector y(m - 1);
        for (int attempt = 0; attempt < 8; ++attempt) {
          Eigen::LDLT<Matrix> ldlt(hz + damping * Matrix::Identity(m - 1, m - 1));
          if (ldlt.info() == Eigen::Success) {
            y = ldlt.solve(rhs);
            if (y.allFinite()) break;
          }
          damping = damping == 0.0 ? 1e-12 * (1.0 + hz.diagonal().maxCoeff()) : damping * 100.0;
        }
        if (!y.allFinite()) return used;
        double tail = 0.0;
        for (Eigen::Index a = 0; a < m - 1; ++a) {
          d[free[static_cast<std::size_t>(a)]] = y[a];
          tail += y[a];
        }
        d[last] = -tail;
        double nu_acc = 0.0;
        for (Eigen::Index j : free) nu_acc += grad[j] + hess.row(j).dot(d);
        nu = nu_acc / static_cast<double>(m);
      }

      const double step_scale = d.lpNorm<Eigen::Infinity>();
      if (step_scale <= 1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
        // converged on this working set: release a bound if its multiplier
        // says so, otherwise the stage is done
        Eigen::Index release = -1;
        double worst = -1e-12 * (1.0 + grad.lpNorm<Eigen::Infinity>());
        for (Eigen::Index j = 0; j < n; ++j) {
          if (!active[static_cast<std::size_t>(j)]) continue;
          const double rc = grad[j] - nu;
          if (rc < worst) {
            worst = rc;
            release = j;
          }
        }
        if (release < 0 || releases >= 3 * static_cast<int>(n)) return used;
        ++releases;
        x[release] = 4e-14;  // lift off the bound; rescaled below
        x /= x.sum();
        continue;
      }

      double alpha = 1.0;
      for (Eigen::Index j : free)
        if (d[j] < 0.0) alpha = std::min(alpha, -x[j] / d[j]);
      const double f0 = sp_.value_smoothed(x, eps);
      const double slope = grad.dot(d);
      while (alpha > 1e-18 &&
             sp_.value_smoothed(x + alpha * d, eps) > f0 + 1e-4 * alpha * slope)
        alpha *= 0.5;
      if (alpha <= 1e-18) return used;
      x += alpha * d;
      for (Eigen::Index j = 0; j < n; ++j)
        if (x[j] < 1e-15) x[j] = 0.0;
      x /= x.sum();
    }
    return used;
  }

  // The optimum may sit exactly at a kink (an organization can reach an
  // agent's aspired state).  There the distance term's subdifferential is a
  // full ball, which leaves room to pick the certifying element: solve
  // A x = v_i, then choose b with ||b|| <= 1 making the total subgradient as
  // close to a constant vector as possible (constant vectors have zero gap).
  bool try_kink(Eigen::Index i) {
    if (sp_.c[i] <= 0.0) return false;
    Eigen::PartialPivLU<Matrix> lu(sp_.A);
    Vector x = lu.solve(sp_.V.col(i));
    if (!x.allFinite() || x.minCoeff() < -1e-11) return false;
    x = x.cwiseMax(0.0);
    const double s = x.sum();
    if (std::abs(s - 1.0) > 1e-9) return false;
    x /= s;
    if (sp_.value(x) > best_value_ + 1e-9 * (1.0 + std::abs(best_value_))) return false;

    const Vector y = sp_.A * x;
    Vector inner = sp_.rho * (y - sp_.w);
    for (Eigen::Index j = 0; j < sp_.V.cols(); ++j) {
      if (j == i || sp_.c[j] <= 0.0) continue;
      const Vector r = y - sp_.V.col(j);
      const double nr = r.norm();
      if (nr > kKinkZero) inner += (sp_.c[j] / nr) * r;
    }
    const Vector g0 = sp_.A.transpose() * inner;

    const Vector z = sp_.A.transpose().partialPivLu().solve(g0);
    const double level = z.mean();
    Vector b = (Vector::Constant(z.size(), level) - z) / sp_.c[i];
    if (b.norm() > 1.0) {
      // boundary-constrained kink: minimize the gap over the unit ball
      b /= b.norm();
      Vector best_b = b;
      double best_gap = std::numeric_limits<double>::infinity();
      for (int it = 0; it < 200; ++it) {
        const Vector g = g0 + sp_.c[i] * (sp_.A.transpose() * b);
        const double gap = Subproblem::fw_gap(g, x);
        if (gap < best_gap) {
          best_gap = gap;
          best_b = b;
        }
        Eigen::Index jstar = 0;
        g.minCoeff(&jstar);
        Vector sg = sp_.c[i] * (sp_.A * (x - Vector::Unit(x.size(), jstar)));
        const double sgn = sg.norm();
        if (sgn == 0.0) break;
        b -= (0.5 / (std::sqrt(it + 1.0) * sgn)) * sg;
        if (b.norm() > 1.0) b /= b.norm();
      }
      b = best_b;
    }
    const Vector g = g0 + sp_.c[i] * (sp_.A.transpose() * b);
    return consider(x, g, Subproblem::fw_gap(g, x));
  }

  const Subproblem& sp_;
  double target_;
  OrgSolveOptions options_;
  Vector best_x_, best_g_;
  double best_gap_ = std::numeric_limits<double>::infinity();
  Vector best_value_x_;
  double best_value_ = std::numeric_limits<double>::infinity();
  int iterations_ = 0;
};

Subproblem make_subproblem(const OrganizationProfile& org, const Vector& p_row,
                           const std::vector<AgentProfile>& agents, const Matrix& a,
                           double sigma_min_a) {
  const Eigen::Index n = a.rows();
  require_org(org, n);
  if (agents.empty()) throw DimensionMismatch("no agents");
  if (p_row.size() != static_cast<Eigen::Index>(agents.size()))
    throw DimensionMismatch("probability row has size " + std::to_string(p_row.size()) +
                            " but there are " + std::to_string(agents.size()) + " agents");
  if (p_row.minCoeff() < -1e-12 || p_row.maxCoeff() > 1.0 + 1e-12)
    throw Error("choice probabilities must lie in [0, 1]");
  Subproblem sp;
  sp.A = a;
  sp.V.resize(n, static_cast<Eigen::Index>(agents.size()));
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].aspired_state.size() != n)
      throw DimensionMismatch("agent " + std::to_string(i) + " aspired state has wrong size");
    sp.V.col(static_cast<Eigen::Index>(i)) = agents[i].aspired_state;
  }
  sp.c = p_row.cwiseMax(0.0);
  sp.w = org.anchor;
  sp.rho = org.tau / org.eta;
  sp.sigma = sp.rho * sigma_min_a * sigma_min_a;
  return sp;
}

double smallest_singular_value(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(a.rows() - 1);
}

}  // namespace

double payoff(const OrganizationProfile& org, const NetworkState& y) {
  require_org(org, y.size());
  require_simplex(y, kStateTol, "network state");
  return -0.5 * org.tau * (y - org.anchor).squaredNorm();
}

Vector payoff_gradient(const OrganizationProfile& org, const NetworkState& y) {
  require_org(org, y.size());
  return -org.tau * (y - org.anchor);
}

double org_objective(const OrganizationProfile& org, const Vector& x, const Vector& p_row,
                     const std::vector<AgentProfile>& agents, const TransitionMatrix& m, int t) {
  require_org(org, m.n());
  const NetworkState y = propagate(m, x, t);
  double f = -payoff(org, y) / org.eta;
  for (std::size_t i = 0; i < agents.size(); ++i)
    f += p_row[static_cast<Eigen::Index>(i)] * (agents[i].aspired_state - y).norm();
  return f;
}

OrgSolution solve_org_subproblem(const OrganizationProfile& org, const Vector& p_row,
                                 const std::vector<AgentProfile>& agents,
                                 const TransitionMatrix& m, int t, double delta2,
                                 const OrgSolveOptions& options) {
  if (delta2 < 0.0) throw Error("delta2 must be nonnegative");
  const Matrix a = m.power(t);
  const Subproblem sp = make_subproblem(org, p_row, agents, a, smallest_singular_value(a));
  const double target = delta2 > 0.0 ? delta2 : options.gap_floor;
  ColumnSolver solver(sp, target, options);
  Vector x0 = options.warm_start != nullptr
                  ? *options.warm_start
                  : Vector::Constant(m.n(), 1.0 / static_cast<double>(m.n()));
  return solver.solve(std::move(x0));
}

BlockSolution manipulation_matrix(const std::vector<OrganizationProfile>& orgs,
                                  const ChoiceMatrix& p, const std::vector<AgentProfile>& agents,
                                  const TransitionMatrix& m, int t, double delta2,
                                  const OrgSolveOptions& options,
                                  const ManipulationMatrix* warm_start) {
  if (orgs.empty()) throw DimensionMismatch("no organizations");
  if (p.rows() != static_cast<Eigen::Index>(orgs.size()) ||
      p.cols() != static_cast<Eigen::Index>(agents.size()))
    throw DimensionMismatch("choice matrix must be K x N");
  if (delta2 < 0.0) throw Error("delta2 must be nonnegative");
  const Matrix a = m.power(t);
  const double sigma_min_a = smallest_singular_value(a);

  BlockSolution block;
  block.x.resize(m.n(), static_cast<Eigen::Index>(orgs.size()));
  block.columns.resize(orgs.size());
  parallel_for(orgs.size(), [&](std::size_t k) {
    const Eigen::Index col = static_cast<Eigen::Index>(k);
    const Subproblem sp = make_subproblem(orgs[k], p.row(col).transpose(), agents, a, sigma_min_a);
    const double target = delta2 > 0.0 ? delta2 : options.gap_floor;
    OrgSolveOptions column_options = options;
    column_options.warm_start = nullptr;
    ColumnSolver solver(sp, target, column_options);
    Vector x0 = warm_start != nullptr
                    ? Vector(warm_start->col(col))
                    : Vector::Constant(m.n(), 1.0 / static_cast<double>(m.n()));
    try {
      OrgSolution sol = solver.solve(std::move(x0));
      block.x.col(col) = sol.x;
      block.columns[k] = std::move(sol.certificate);
    } catch (const NonConvergence& e) {
      throw NonConvergence("column " + std::to_string(k) + ": " + e.what(), e.best_gap);
    }
  });
  block.gap = 0.0;
  for (const auto& cert : block.columns) block.gap += cert.gap;
  return block;
}

}  // namespace netmanip
