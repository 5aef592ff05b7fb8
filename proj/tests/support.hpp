#pragma once

#include <vector>

#include "netmanip/altmin.hpp"
#include "netmanip/rng.hpp"
#include "netmanip/types.hpp"

namespace netmanip::testing {

inline Vector vec(std::initializer_list<double> entries) {
  Vector v(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index i = 0;
  for (double e : entries) v[i++] = e;
  return v;
}

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double e : row) m(i, j++) = e;
    ++i;
  }
  return m;
}

inline Matrix random_stochastic(Rng& rng, Eigen::Index n) {
  Matrix m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m.col(j) = rng.simplex_point(n);
  return m;
}

inline Matrix random_columns_simplex(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) m.col(j) = rng.simplex_point(rows);
  return m;
}

/// tau that puts the contraction factor exactly at lambda_target when this
/// organization carries the minimal tau/eta.
inline double tau_for_lambda(const TransitionMatrix& m, int t, int num_agents, double beta_min,
                             double lambda_target, double eta) {
  const double smin_t = std::pow(m.sigma_min(), t);
  const double smax_t = std::pow(m.sigma_max(), t);
  return eta * static_cast<double>(num_agents) * smax_t * smax_t /
         (lambda_target * smin_t * smin_t * beta_min);
}

/// Five hand-built stable instances (lambda <= 0.9) of growing size, mixing
/// MNL and NL agents and heterogeneous organizations.
inline Scenario stable_scenario(int variant) {
  switch (variant) {
    case 0: {
      TransitionMatrix m(mat({{0.75, 0.25}, {0.25, 0.75}}));
      Scenario s{m};
      s.horizon = 1;
      s.agents = {{vec({0.9, 0.1}), ChoiceModel::mnl(2, 1.0)},
                  {vec({0.3, 0.7}), ChoiceModel::mnl(2, 1.0)},
                  {vec({0.5, 0.5}), ChoiceModel::mnl(2, 1.0)}};
      const double tau = tau_for_lambda(m, 1, 3, 1.0, 0.75, 1.0);
      s.orgs = {{1.0, tau, vec({0.6, 0.4})}, {2.0, 2.5 * tau, vec({0.2, 0.8})}};
      s.max_iters = 80;
      s.seed = 7001;
      validate_scenario(s);
      return s;
    }
    case 1: {
      TransitionMatrix m(mat({{0, 0, 1}, {1, 0, 0}, {0, 1, 0}}));
      Scenario s{m};
      s.horizon = 2;
      s.agents = {{vec({0.8, 0.1, 0.1}), ChoiceModel::mnl(2, 0.8)},
                  {vec({0.1, 0.8, 0.1}), ChoiceModel::mnl(2, 1.0)},
                  {vec({0.1, 0.1, 0.8}), ChoiceModel::mnl(2, 1.2)},
                  {vec({0.4, 0.3, 0.3}), ChoiceModel::mnl(2, 0.9)}};
      const double tau = tau_for_lambda(m, 2, 4, 0.8, 5.0 / 6.0, 1.0);
      s.orgs = {{1.0, tau, vec({1.0 / 3, 1.0 / 3, 1.0 / 3})},
                {1.0, 1.5 * tau, vec({0.5, 0.25, 0.25})}};
      s.max_iters = 80;
      s.seed = 7002;
      validate_scenario(s);
      return s;
    }
    case 2: {
      Matrix raw = 0.7 * Matrix::Identity(4, 4) + 0.075 * Matrix::Ones(4, 4);
      TransitionMatrix m(raw);
      Scenario s{m};
      s.horizon = 1;
      s.agents = {{vec({0.7, 0.1, 0.1, 0.1}), ChoiceModel::mnl(3, 0.9)},
                  {vec({0.1, 0.7, 0.1, 0.1}), ChoiceModel::mnl(3, 1.1)},
                  {vec({0.1, 0.1, 0.7, 0.1}), ChoiceModel::mnl(3, 0.95)},
                  {vec({0.1, 0.1, 0.1, 0.7}), ChoiceModel::mnl(3, 1.0)},
                  {vec({0.25, 0.25, 0.25, 0.25}), ChoiceModel::mnl(3, 1.3)}};
      const double tau = tau_for_lambda(m, 1, 5, 0.9, 0.5, 1.0);
      s.orgs = {{1.0, tau, vec({0.4, 0.3, 0.2, 0.1})},
                {1.0, 1.2 * tau, vec({0.1, 0.2, 0.3, 0.4})},
                {0.5, 0.7 * tau, vec({0.25, 0.25, 0.25, 0.25})}};
      s.max_iters = 80;
      s.seed = 7003;
      validate_scenario(s);
      return s;
    }
    case 3: {
      TransitionMatrix m(mat({{0.9, 0.1}, {0.1, 0.9}}));
      Scenario s{m};
      s.horizon = 1;
      s.agents = {{vec({0.8, 0.2}),
                   ChoiceModel::nested(3, {{0, 1}, {2}}, {0.5, 1.0})},
                  {vec({0.35, 0.65}), ChoiceModel::mnl(3, 0.7)}};
      const double tau = tau_for_lambda(m, 1, 2, 0.5, 0.8, 1.0);
      s.orgs = {{1.0, tau, vec({0.7, 0.3})},
                {1.0, 1.2 * tau, vec({0.4, 0.6})},
                {1.0, 1.6 * tau, vec({0.5, 0.5})}};
      s.max_iters = 80;
      s.seed = 7004;
      validate_scenario(s);
      return s;
    }
    default: {
      Matrix cyc = Matrix::Zero(5, 5);
      for (Eigen::Index j = 0; j < 5; ++j) cyc((j + 1) % 5, j) = 1.0;
      Matrix raw = 0.6 * Matrix::Identity(5, 5) + 0.4 * cyc;
      TransitionMatrix m(raw);
      Scenario s{m};
      s.horizon = 1;
      std::vector<Vector> aspirations;
      Rng rng(424242);
      for (int i = 0; i < 6; ++i) aspirations.push_back(rng.simplex_point(5));
      s.agents = {{aspirations[0], ChoiceModel::mnl(3, 0.75)},
                  {aspirations[1], ChoiceModel::mnl(3, 1.0)},
                  {aspirations[2], ChoiceModel::nested(3, {{0, 2}, {1}}, {0.8, 1.0})},
                  {aspirations[3], ChoiceModel::mnl(3, 0.9)},
                  {aspirations[4], ChoiceModel::mnl(3, 1.5)},
                  {aspirations[5], ChoiceModel::mnl(3, 1.1)}};
      const double tau = tau_for_lambda(m, 1, 6, 0.75, 0.85, 1.0);
      s.orgs = {{1.0, tau, rng.simplex_point(5)},
                {2.0, 2.2 * tau, rng.simplex_point(5)},
                {1.0, 1.4 * tau, rng.simplex_point(5)}};
      s.max_iters = 80;
      s.seed = 7005;
      validate_scenario(s);
      return s;
    }
  }
}

}  // namespace netmanip::testing
