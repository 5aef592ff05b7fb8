#include "netmanip/choice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "netmanip/rng.hpp"

namespace netmanip {

namespace {

constexpr double kEulerGamma = 0.57721566490153286;
constexpr double kProbTol = 1e-12;

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// log sum exp with max subtraction
double lse(const Vector& a) {
  const double m = a.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((a.array() - m).exp().sum());
}

void require_utilities(const ChoiceModel& model, const Vector& u) {
  if (u.size() != model.alternatives())
    throw DimensionMismatch("utility vector has size " + std::to_string(u.size()) +
                            ", model has " + std::to_string(model.alternatives()) +
                            " alternatives");
  if (!u.allFinite()) throw Error("utilities must be finite");
}

// Per-nest inclusive values I_l = log sum_{m in nest l} exp(u_m / mu_l).
Vector inclusive_values(const ChoiceModel& model, const Vector& u) {
  const auto& nests = model.nests();
  Vector iv(static_cast<Eigen::Index>(nests.size()));
  for (std::size_t l = 0; l < nests.size(); ++l) {
    Vector a(static_cast<Eigen::Index>(nests[l].size()));
    for (std::size_t j = 0; j < nests[l].size(); ++j)
      a[static_cast<Eigen::Index>(j)] = u[nests[l][j]] / model.nest_mu()[l];
    iv[static_cast<Eigen::Index>(l)] = lse(a);
  }
  return iv;
}

}  // namespace

ChoiceModel ChoiceModel::mnl(int alternatives, double mu) {
  if (alternatives < 1) throw InvalidModel("need at least one alternative");
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw InvalidModel("mnl scale must be positive, got " + std::to_string(mu));
  ChoiceModel m;
  m.kind_ = Kind::Mnl;
  m.k_ = alternatives;
  m.mu_ = mu;
  return m;
}

ChoiceModel ChoiceModel::nested(int alternatives, std::vector<std::vector<int>> nests,
                                std::vector<double> nest_mu) {
  if (alternatives < 1) throw InvalidModel("need at least one alternative");
  if (nests.empty()) throw InvalidModel("nested model needs at least one nest");
  if (nests.size() != nest_mu.size())
    throw InvalidModel("got " + std::to_string(nests.size()) + " nests but " +
                       std::to_string(nest_mu.size()) + " scales");
  std::vector<int> owner(static_cast<std::size_t>(alternatives), -1);
  for (std::size_t l = 0; l < nests.size(); ++l) {
    if (nests[l].empty()) throw InvalidModel("nest " + std::to_string(l) + " is empty");
    if (!(nest_mu[l] > 0.0) || nest_mu[l] > 1.0)
      throw InvalidModel("nest scale must lie in (0, 1], got " + std::to_string(nest_mu[l]));
    for (int a : nests[l]) {
      if (a < 0 || a >= alternatives)
        throw InvalidModel("alternative index " + std::to_string(a) + " out of range");
      if (owner[static_cast<std::size_t>(a)] != -1)
        throw InvalidModel("alternative " + std::to_string(a) + " appears in two nests");
      owner[static_cast<std::size_t>(a)] = static_cast<int>(l);
    }
  }
  for (int a = 0; a < alternatives; ++a)
    if (owner[static_cast<std::size_t>(a)] == -1)
      throw InvalidModel("alternative " + std::to_string(a) + " belongs to no nest");
  ChoiceModel m;
  m.kind_ = Kind::Nl;
  m.k_ = alternatives;
  m.nests_ = std::move(nests);
  m.nest_mu_ = std::move(nest_mu);
  m.nest_of_ = std::move(owner);
  return m;
}

ChoiceProbabilities probabilities(const ChoiceModel& model, const Vector& u) {
  require_utilities(model, u);
  const Eigen::Index k = model.alternatives();
  Vector p(k);
  if (model.kind() == ChoiceModel::Kind::Mnl) {
    Vector a = u / model.mu();
    a.array() -= a.maxCoeff();
    p = a.array().exp();
    p /= p.sum();
    return p;
  }
  const auto& nests = model.nests();
  const Vector iv = inclusive_values(model, u);
  Vector nest_score(iv.size());
  for (Eigen::Index l = 0; l < iv.size(); ++l) nest_score[l] = model.nest_mu()[l] * iv[l];
  nest_score.array() -= nest_score.maxCoeff();
  Vector nest_w = nest_score.array().exp();
  nest_w /= nest_w.sum();
  for (std::size_t l = 0; l < nests.size(); ++l) {
    const double mu_l = model.nest_mu()[l];
    Vector a(static_cast<Eigen::Index>(nests[l].size()));
    for (std::size_t j = 0; j < nests[l].size(); ++j)
      a[static_cast<Eigen::Index>(j)] = u[nests[l][j]] / mu_l;
    a.array() -= a.maxCoeff();
    Vector within = a.array().exp();
    within /= within.sum();
    for (std::size_t j = 0; j < nests[l].size(); ++j)
      p[nests[l][j]] = nest_w[static_cast<Eigen::Index>(l)] * within[static_cast<Eigen::Index>(j)];
  }
  return p;
}

double surplus(const ChoiceModel& model, const Vector& u) {
  require_utilities(model, u);
  if (model.kind() == ChoiceModel::Kind::Mnl) return model.mu() * lse(u / model.mu());
  const Vector iv = inclusive_values(model, u);
  Vector nest_score(iv.size());
  for (Eigen::Index l = 0; l < iv.size(); ++l) nest_score[l] = model.nest_mu()[l] * iv[l];
  return lse(nest_score);
}

double conjugate(const ChoiceModel& model, const Vector& p) {
  if (p.size() != model.alternatives()) throw DimensionMismatch("probability vector size");
  require_simplex(p, kProbTol, "choice probabilities");
  if (model.kind() == ChoiceModel::Kind::Mnl) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) s += xlogx(p[i]);
    return model.mu() * s;
  }
  double total = 0.0;
  for (std::size_t l = 0; l < model.nests().size(); ++l) {
    const double mu_l = model.nest_mu()[l];
    double q = 0.0;
    for (int a : model.nests()[l]) {
      total += mu_l * xlogx(p[a]);
      q += p[a];
    }
    total += (1.0 - mu_l) * xlogx(q);
  }
  return total;
}

Vector conjugate_gradient(const ChoiceModel& model, const Vector& p) {
  if (p.size() != model.alternatives()) throw DimensionMismatch("probability vector size");
  if (p.minCoeff() <= 0.0)
    throw Error("conjugate gradient needs an interior point of the simplex");
  Vector g(p.size());
  if (model.kind() == ChoiceModel::Kind::Mnl) {
    g = model.mu() * (p.array().log() + 1.0);
    return g;
  }
  for (std::size_t l = 0; l < model.nests().size(); ++l) {
    const double mu_l = model.nest_mu()[l];
    double q = 0.0;
    for (int a : model.nests()[l]) q += p[a];
    const double nest_term = (1.0 - mu_l) * (std::log(q) + 1.0);
    for (int a : model.nests()[l]) g[a] = mu_l * (std::log(p[a]) + 1.0) + nest_term;
  }
  return g;
}

double convexity_parameter(const ChoiceModel& model) {
  if (model.kind() == ChoiceModel::Kind::Mnl) return model.mu();
  return *std::min_element(model.nest_mu().begin(), model.nest_mu().end());
}

double convexity_parameter_lemma_bound(const Matrix& mode_densities) {
  if (mode_densities.rows() != mode_densities.cols() || mode_densities.rows() < 2)
    throw MissingPair("mode-density table must be square with K >= 2");
  double sum = 0.0;
  for (Eigen::Index k = 0; k < mode_densities.rows(); ++k) {
    for (Eigen::Index m = 0; m < mode_densities.cols(); ++m) {
      if (k == m) continue;
      const double d = mode_densities(k, m);
      if (!std::isfinite(d) || d < 0.0)
        throw MissingPair("density for pair (" + std::to_string(k) + ", " + std::to_string(m) +
                          ") is missing or invalid");
      sum += d;
    }
  }
  if (sum <= 0.0) throw MissingPair("all pairwise mode densities are zero");
  return 1.0 / (2.0 * sum);
}

ChoiceProbabilities rational_inattention_solve(const ChoiceModel& model, const Vector& cost) {
  return probabilities(model, -cost);
}

Vector sample_choice(const ChoiceModel& model, const Vector& u, std::uint64_t seed, int draws) {
  require_utilities(model, u);
  if (draws < 1) throw Error("need at least one draw");
  const Eigen::Index k = model.alternatives();
  Rng rng(seed);
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);

  if (model.kind() == ChoiceModel::Kind::Mnl) {
    const double mu = model.mu();
    for (int d = 0; d < draws; ++d) {
      int best = 0;
      double best_val = -std::numeric_limits<double>::infinity();
      for (Eigen::Index a = 0; a < k; ++a) {
        const double val = u[a] + mu * (rng.gumbel() - kEulerGamma);
        if (val > best_val) {
          best_val = val;
          best = static_cast<int>(a);
        }
      }
      ++counts[best];
    }
  } else {
    const auto& nests = model.nests();
    const Vector iv = inclusive_values(model, u);
    for (int d = 0; d < draws; ++d) {
      // stage one: nests compete through their inclusive values
      int best_nest = 0;
      double best_nest_val = -std::numeric_limits<double>::infinity();
      for (std::size_t l = 0; l < nests.size(); ++l) {
        const double val =
            model.nest_mu()[l] * iv[static_cast<Eigen::Index>(l)] + rng.gumbel();
        if (val > best_nest_val) {
          best_nest_val = val;
          best_nest = static_cast<int>(l);
        }
      }
      // stage two: alternatives compete within the winning nest; a full set
      // of K variates is drawn so the stream length per draw is fixed
      int best = nests[static_cast<std::size_t>(best_nest)].front();
      double best_val = -std::numeric_limits<double>::infinity();
      for (Eigen::Index a = 0; a < k; ++a) {
        const double g = rng.gumbel();
        if (model.nest_of(static_cast<int>(a)) != best_nest) continue;
        const double val = u[a] + model.nest_mu()[static_cast<std::size_t>(best_nest)] * g;
        if (val > best_val) {
          best_val = val;
          best = static_cast<int>(a);
        }
      }
      ++counts[best];
    }
  }
  return counts.cast<double>() / static_cast<double>(draws);
}

}  // namespace netmanip
