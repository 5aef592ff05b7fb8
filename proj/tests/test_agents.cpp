#include "netmanip/agents.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "netmanip/oracle.hpp"
#include "support.hpp"

using namespace netmanip;
using netmanip::testing::mat;
using netmanip::testing::random_columns_simplex;
using netmanip::testing::random_stochastic;
using netmanip::testing::vec;

namespace {

std::vector<AgentProfile> two_agents() {
  return {{vec({0.9, 0.1}), ChoiceModel::mnl(2, 1.0)},
          {vec({0.25, 0.75}), ChoiceModel::mnl(2, 0.6)}};
}

}  // namespace

TEST(DistanceVector, ZeroAtExactMatch) {
  TransitionMatrix m(Matrix::Identity(2, 2));
  AgentProfile agent{vec({0.3, 0.7}), ChoiceModel::mnl(2, 1.0)};
  Matrix x(2, 2);
  x.col(0) = vec({0.3, 0.7});
  x.col(1) = vec({0.6, 0.4});
  const Vector g = distance_vector(agent, x, m, 3);
  EXPECT_DOUBLE_EQ(g[0], 0.0);
  EXPECT_GT(g[1], 0.0);
}

TEST(DistanceVector, SimplexVerticesAreSqrtTwoApart) {
  TransitionMatrix m(Matrix::Identity(2, 2));
  AgentProfile agent{vec({1.0, 0.0}), ChoiceModel::mnl(1, 1.0)};
  Matrix x(2, 1);
  x.col(0) = vec({0.0, 1.0});
  EXPECT_NEAR(distance_vector(agent, x, m, 5)[0], std::sqrt(2.0), 1e-15);
}

TEST(DistanceVector, PermutationFixesUniform) {
  TransitionMatrix m(mat({{0, 1}, {1, 0}}));
  AgentProfile agent{vec({0.5, 0.5}), ChoiceModel::mnl(1, 1.0)};
  Matrix x(2, 1);
  x.col(0) = vec({0.5, 0.5});
  EXPECT_NEAR(distance_vector(agent, x, m, 1)[0], 0.0, 1e-15);
}

TEST(DistanceMatrix, ColumnwiseAndBounded) {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    TransitionMatrix m(random_stochastic(rng, 3));
    std::vector<AgentProfile> agents = {{rng.simplex_point(3), ChoiceModel::mnl(2, 1.0)},
                                        {rng.simplex_point(3), ChoiceModel::mnl(2, 1.0)}};
    const Matrix x = random_columns_simplex(rng, 3, 2);
    const Matrix g = distance_matrix(agents, x, m, 2);
    EXPECT_EQ(g.rows(), 2);
    EXPECT_EQ(g.cols(), 2);
    EXPECT_LE(g.maxCoeff(), std::sqrt(2.0) + 1e-12);
    EXPECT_GE(g.minCoeff(), 0.0);
    for (Eigen::Index i = 0; i < 2; ++i)
      EXPECT_TRUE(g.col(i).isApprox(distance_vector(agents[static_cast<std::size_t>(i)], x, m, 2)));
  }
}

TEST(DistanceMatrix, ConstantWhenAllAgentsAndColumnsAgree) {
  TransitionMatrix m(Matrix::Identity(2, 2));
  std::vector<AgentProfile> agents = {{vec({0.8, 0.2}), ChoiceModel::mnl(2, 1.0)},
                                      {vec({0.8, 0.2}), ChoiceModel::mnl(2, 1.0)}};
  Matrix x(2, 2);
  x.col(0) = vec({0.5, 0.5});
  x.col(1) = vec({0.5, 0.5});
  const Matrix g = distance_matrix(agents, x, m, 1);
  EXPECT_NEAR(g.maxCoeff(), g.minCoeff(), 1e-15);
}

TEST(DistanceMatrix, LipschitzInTheDualNorm) {
  Rng rng(42);
  std::vector<AgentProfile> agents;
  for (int i = 0; i < 4; ++i) agents.push_back({rng.simplex_point(3), ChoiceModel::mnl(2, 1.0)});
  TransitionMatrix m(random_stochastic(rng, 3));
  const int t = 2;
  const double modulus = std::sqrt(4.0) * std::pow(m.sigma_max(), t);
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix x = random_columns_simplex(rng, 3, 2);
    const Matrix y = random_columns_simplex(rng, 3, 2);
    const Matrix gx = distance_matrix(agents, x, m, t);
    const Matrix gy = distance_matrix(agents, y, m, t);
    double dual = 0.0;
    for (Eigen::Index i = 0; i < gx.cols(); ++i) {
      const double linf = (gx.col(i) - gy.col(i)).lpNorm<Eigen::Infinity>();
      dual += linf * linf;
    }
    dual = std::sqrt(dual);
    EXPECT_LE(dual, modulus * (x - y).norm() + 1e-10);
  }
}

TEST(ChoiceMatrixOp, UniformColumnWhenDistancesTie) {
  TransitionMatrix m(Matrix::Identity(2, 2));
  std::vector<AgentProfile> agents = {{vec({0.5, 0.5}), ChoiceModel::mnl(2, 1.0)}};
  Matrix x(2, 2);
  x.col(0) = vec({0.9, 0.1});
  x.col(1) = vec({0.1, 0.9});
  const Matrix p = choice_matrix(agents, x, m, 1);
  EXPECT_NEAR(p(0, 0), 0.5, 1e-14);
  EXPECT_NEAR(p(1, 0), 0.5, 1e-14);
}

TEST(ChoiceMatrixOp, SmallMuPicksTheClosestOrganization) {
  TransitionMatrix m(Matrix::Identity(2, 2));
  std::vector<AgentProfile> agents = {{vec({1.0, 0.0}), ChoiceModel::mnl(2, 1e-3)}};
  Matrix x(2, 2);
  x.col(0) = vec({1.0, 0.0});   // distance 0
  x.col(1) = vec({0.0, 1.0});   // distance sqrt(2)
  const Matrix p = choice_matrix(agents, x, m, 1);
  EXPECT_NEAR(p(0, 0), 1.0, 1e-6);
  EXPECT_NEAR(p(1, 0), 0.0, 1e-6);
}

TEST(ChoiceMatrixOp, ColumnsSolveTheRationalInattentionProblem) {
  Rng rng(43);
  TransitionMatrix m(random_stochastic(rng, 2));
  auto agents = two_agents();
  const Matrix x = random_columns_simplex(rng, 2, 2);
  const Matrix g = distance_matrix(agents, x, m, 1);
  const Matrix p = choice_matrix(agents, x, m, 1);
  for (Eigen::Index i = 0; i < 2; ++i) {
    const Vector direct =
        rational_inattention_solve(agents[static_cast<std::size_t>(i)].model, g.col(i));
    EXPECT_LT((p.col(i) - direct).lpNorm<Eigen::Infinity>(), 1e-15);
  }
}

TEST(ChoiceMatrixOp, PermutingAgentsPermutesColumns) {
  Rng rng(44);
  TransitionMatrix m(random_stochastic(rng, 3));
  std::vector<AgentProfile> agents = {{rng.simplex_point(3), ChoiceModel::mnl(2, 0.8)},
                                      {rng.simplex_point(3), ChoiceModel::mnl(2, 1.2)}};
  std::vector<AgentProfile> swapped = {agents[1], agents[0]};
  const Matrix x = random_columns_simplex(rng, 3, 2);
  const Matrix p = choice_matrix(agents, x, m, 1);
  const Matrix q = choice_matrix(swapped, x, m, 1);
  EXPECT_TRUE(p.col(0).isApprox(q.col(1)));
  EXPECT_TRUE(p.col(1).isApprox(q.col(0)));
}

TEST(ChoiceMatrixOp, MatchesGridSearchOnTinyInstance) {
  // the variational P-block objective, minimized exhaustively
  TransitionMatrix m(mat({{0.8, 0.3}, {0.2, 0.7}}));
  std::vector<AgentProfile> agents = {{vec({0.4, 0.6}), ChoiceModel::mnl(2, 1.0)}};
  Matrix x(2, 2);
  x.col(0) = vec({0.7, 0.3});
  x.col(1) = vec({0.2, 0.8});
  const Matrix g = distance_matrix(agents, x, m, 1);
  const Matrix p = choice_matrix(agents, x, m, 1);
  const auto objective = [&](const Vector& q) {
    return g.col(0).dot(q) + conjugate(agents[0].model, q);
  };
  const auto grid = grid_minimize(objective, GridSpec{2, 1e-5});
  EXPECT_LT((p.col(0) - grid.point).lpNorm<Eigen::Infinity>(), 1e-4);
}

TEST(PBlockGap, NearZeroAtTheExactMinimizer) {
  Rng rng(45);
  TransitionMatrix m(random_stochastic(rng, 2));
  auto agents = two_agents();
  const Matrix x = random_columns_simplex(rng, 2, 2);
  const Matrix g = distance_matrix(agents, x, m, 1);
  const Matrix p = choice_matrix(agents, x, m, 1);
  Vector per_agent;
  const double gap = p_block_gap(p, g, agents, &per_agent);
  EXPECT_LT(gap, 1e-12);
  EXPECT_EQ(per_agent.size(), 2);
  EXPECT_GE(per_agent.minCoeff(), -1e-15);
}

TEST(PerturbToDelta, ZeroTargetReturnsInputUnchanged) {
  Rng rng(46);
  TransitionMatrix m(random_stochastic(rng, 2));
  auto agents = two_agents();
  const Matrix x = random_columns_simplex(rng, 2, 2);
  const Matrix g = distance_matrix(agents, x, m, 1);
  const Matrix p = choice_matrix(agents, x, m, 1);
  const auto result = perturb_to_delta(p, 0.0, g, agents);
  EXPECT_EQ((result.p - p).lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_LT(result.gap, 1e-12);
  EXPECT_TRUE(result.reached_target);
}

TEST(PerturbToDelta, RealizedGapLandsInTheBand) {
  Rng rng(47);
  TransitionMatrix m(random_stochastic(rng, 3));
  std::vector<AgentProfile> agents = {
      {rng.simplex_point(3), ChoiceModel::mnl(2, 0.9)},
      {rng.simplex_point(3), ChoiceModel::mnl(2, 1.1)},
      {rng.simplex_point(3), ChoiceModel::nested(2, {{0}, {1}}, {0.8, 1.0})}};
  const Matrix x = random_columns_simplex(rng, 3, 2);
  const Matrix g = distance_matrix(agents, x, m, 1);
  const Matrix p = choice_matrix(agents, x, m, 1);
  for (double target : {1e-4, 1e-3, 1e-2, 1e-1}) {
    const auto result = perturb_to_delta(p, target, g, agents);
    EXPECT_TRUE(result.reached_target);
    EXPECT_LE(result.gap, target);
    EXPECT_GE(result.gap, 0.5 * target);
    // the reported certificate must agree with an independent evaluation
    Vector per_agent;
    const double recomputed = p_block_gap(result.p, g, agents, &per_agent);
    EXPECT_NEAR(recomputed, result.gap, 1e-12);
    require_simplex_columns(result.p, 1e-10, "perturbed choice matrix");
  }
}

TEST(PerturbToDelta, RealizedGapIsMonotoneInTheTarget) {
  Rng rng(48);
  TransitionMatrix m(random_stochastic(rng, 2));
  auto agents = two_agents();
  const Matrix x = random_columns_simplex(rng, 2, 2);
  const Matrix g = distance_matrix(agents, x, m, 1);
  const Matrix p = choice_matrix(agents, x, m, 1);
  double previous = 0.0;
  for (double target : {1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 0.3}) {
    const auto result = perturb_to_delta(p, target, g, agents);
    EXPECT_GE(result.gap, previous);
    previous = result.gap;
  }
}
