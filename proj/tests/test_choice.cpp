#include "netmanip/choice.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "netmanip/oracle.hpp"
#include "netmanip/rng.hpp"
#include "support.hpp"

using namespace netmanip;
using netmanip::testing::mat;
using netmanip::testing::vec;

namespace {

Vector random_utilities(Rng& rng, Eigen::Index k, double span = 4.0) {
  Vector u(k);
  for (Eigen::Index i = 0; i < k; ++i) u[i] = span * (rng.uniform01() - 0.5);
  return u;
}

const ChoiceModel kTwoNest = ChoiceModel::nested(3, {{0, 1}, {2}}, {0.6, 1.0});

}  // namespace

TEST(ChoiceModel, ValidatesParameters) {
  EXPECT_THROW(ChoiceModel::mnl(3, 0.0), InvalidModel);
  EXPECT_THROW(ChoiceModel::mnl(3, -1.0), InvalidModel);
  EXPECT_THROW(ChoiceModel::nested(3, {{0, 1}, {1, 2}}, {0.5, 0.5}), InvalidModel);
  EXPECT_THROW(ChoiceModel::nested(3, {{0, 1}}, {0.5}), InvalidModel);
  EXPECT_THROW(ChoiceModel::nested(3, {{0, 1}, {2}}, {0.5, 1.5}), InvalidModel);
  EXPECT_NO_THROW(ChoiceModel::nested(3, {{0, 1}, {2}}, {0.5, 1.0}));
}

TEST(Probabilities, UniformAtEqualUtilities) {
  const auto model = ChoiceModel::mnl(3, 1.0);
  const Vector p = probabilities(model, Vector::Zero(3));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], 1.0 / 3.0, 1e-15);
}

TEST(Probabilities, BinaryLogitValue) {
  // e / (1 + e) by direct evaluation
  const auto model = ChoiceModel::mnl(2, 1.0);
  const Vector p = probabilities(model, vec({1.0, 0.0}));
  EXPECT_NEAR(p[0], 0.7310585786300049, 1e-14);
  EXPECT_NEAR(p[1], 0.2689414213699951, 1e-14);
}

TEST(Probabilities, TranslationInvariant) {
  Rng rng(21);
  const auto mnl = ChoiceModel::mnl(4, 0.7);
  const auto nl = ChoiceModel::nested(4, {{0, 3}, {1, 2}}, {0.4, 0.9});
  for (int trial = 0; trial < 50; ++trial) {
    const Vector u = random_utilities(rng, 4);
    const double c = 10.0 * (rng.uniform01() - 0.5);
    const Vector shifted = (u.array() + c).matrix();
    EXPECT_LT((probabilities(mnl, shifted) - probabilities(mnl, u)).lpNorm<Eigen::Infinity>(),
              1e-13);
    EXPECT_LT((probabilities(nl, shifted) - probabilities(nl, u)).lpNorm<Eigen::Infinity>(),
              1e-13);
  }
}

TEST(Probabilities, SingletonNestsCollapseToMnl) {
  const auto nl = ChoiceModel::nested(3, {{0}, {1}, {2}}, {1.0, 1.0, 1.0});
  const auto mnl = ChoiceModel::mnl(3, 1.0);
  Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector u = random_utilities(rng, 3);
    EXPECT_LT((probabilities(nl, u) - probabilities(mnl, u)).lpNorm<Eigen::Infinity>(), 1e-14);
  }
}

TEST(Probabilities, OverflowSafe) {
  const auto model = ChoiceModel::mnl(2, 1.0);
  const Vector p = probabilities(model, vec({1000.0, 0.0}));
  EXPECT_NEAR(p[0], 1.0, 1e-15);
  EXPECT_TRUE(p.allFinite());
}

TEST(Surplus, EqualUtilitiesGiveLogK) {
  const auto model = ChoiceModel::mnl(4, 1.0);
  const double c = 2.5;
  EXPECT_NEAR(surplus(model, Vector::Constant(4, c)), c + std::log(4.0), 1e-12);
}

TEST(Surplus, TranslationAddsConstant) {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector u = random_utilities(rng, 3);
    const double c = 3.0 * (rng.uniform01() - 0.5);
    const Vector shifted = (u.array() + c).matrix();
    EXPECT_NEAR(surplus(ChoiceModel::mnl(3, 0.8), shifted),
                surplus(ChoiceModel::mnl(3, 0.8), u) + c, 1e-12);
    EXPECT_NEAR(surplus(kTwoNest, shifted), surplus(kTwoNest, u) + c, 1e-12);
  }
}

TEST(Surplus, GradientIsProbabilities) {
  // Williams-Daly-Zachary via central differences
  Rng rng(24);
  const auto mnl = ChoiceModel::mnl(5, 0.6);
  const auto nl = ChoiceModel::nested(5, {{0, 1, 4}, {2, 3}}, {0.5, 0.8});
  for (int trial = 0; trial < 100; ++trial) {
    const Vector u = random_utilities(rng, 5);
    for (const ChoiceModel* model : {&mnl, &nl}) {
      const Vector fd =
          fd_gradient([&](const Vector& v) { return surplus(*model, v); }, u, 1e-6);
      EXPECT_LT((fd - probabilities(*model, u)).lpNorm<Eigen::Infinity>(), 1e-6);
    }
  }
}

TEST(Conjugate, UniformAndVertexValues) {
  const auto model = ChoiceModel::mnl(4, 1.0);
  EXPECT_NEAR(conjugate(model, Vector::Constant(4, 0.25)), -std::log(4.0), 1e-14);
  EXPECT_DOUBLE_EQ(conjugate(model, vec({1.0, 0.0, 0.0, 0.0})), 0.0);
  // scaled by mu
  EXPECT_NEAR(conjugate(ChoiceModel::mnl(4, 0.3), Vector::Constant(4, 0.25)),
              -0.3 * std::log(4.0), 1e-14);
}

TEST(Conjugate, FenchelIdentityWithFittedConstant) {
  // E*(p(u)) = <p(u), u> - E(u) + const; the constant is fitted once per
  // model and comes out zero for these normalizations
  Rng rng(25);
  for (const ChoiceModel& model :
       {ChoiceModel::mnl(3, 0.9), ChoiceModel::nested(3, {{0, 1}, {2}}, {0.45, 1.0})}) {
    const Vector u0 = random_utilities(rng, 3);
    const Vector p0 = probabilities(model, u0);
    const double constant = conjugate(model, p0) - (p0.dot(u0) - surplus(model, u0));
    EXPECT_NEAR(constant, 0.0, 1e-10);
    for (int trial = 0; trial < 50; ++trial) {
      const Vector u = random_utilities(rng, 3);
      const Vector p = probabilities(model, u);
      EXPECT_NEAR(conjugate(model, p), p.dot(u) - surplus(model, u) + constant, 1e-10);
    }
  }
}

TEST(Conjugate, GradientMatchesUtilitiesUpToConstant) {
  Rng rng(26);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector u = random_utilities(rng, 3);
    const Vector p = probabilities(kTwoNest, u);
    const Vector g = conjugate_gradient(kTwoNest, p);
    const Vector diff = g - u;
    EXPECT_NEAR(diff.maxCoeff() - diff.minCoeff(), 0.0, 1e-10);
  }
}

TEST(ConvexityParameter, ModelValues) {
  EXPECT_DOUBLE_EQ(convexity_parameter(ChoiceModel::mnl(3, 0.4)), 0.4);
  EXPECT_DOUBLE_EQ(convexity_parameter(ChoiceModel::nested(3, {{0, 1}, {2}}, {0.3, 0.9})), 0.3);
  EXPECT_DOUBLE_EQ(convexity_parameter(ChoiceModel::nested(3, {{0, 1}, {2}}, {1.0, 1.0})), 1.0);
}

TEST(LemmaBound, LogisticModeDensities) {
  // difference of two IID Gumbel(mu = 1) draws is logistic with scale 1,
  // whose mode density is 1/4
  Matrix densities = Matrix::Constant(2, 2, 0.25);
  EXPECT_NEAR(convexity_parameter_lemma_bound(densities), 1.0, 1e-15);
  Matrix three = Matrix::Constant(3, 3, 0.25);
  EXPECT_NEAR(convexity_parameter_lemma_bound(three), 1.0 / 3.0, 1e-15);
  // homogeneity: doubling the densities halves the bound
  EXPECT_NEAR(convexity_parameter_lemma_bound(2.0 * three), 1.0 / 6.0, 1e-15);
}

TEST(LemmaBound, KernelDensityCrossCheck) {
  // empirical mode density of Gumbel differences
  Rng rng(27);
  const int samples = 1000000;
  const double h = 0.02;
  int in_window = 0;
  for (int i = 0; i < samples; ++i) {
    const double d = rng.gumbel() - rng.gumbel();
    if (std::abs(d) <= h) ++in_window;
  }
  const double density = static_cast<double>(in_window) / (2.0 * h * samples);
  EXPECT_NEAR(density, 0.25, 0.01);
}

TEST(LemmaBound, MissingPairsRejected) {
  Matrix densities = Matrix::Constant(3, 3, 0.25);
  densities(0, 2) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(convexity_parameter_lemma_bound(densities), MissingPair);
  EXPECT_THROW(convexity_parameter_lemma_bound(Matrix::Constant(1, 1, 1.0)), MissingPair);
}

TEST(LemmaBound, NeverExceedsModelBetaForMnl) {
  // K = 2 coincides with mu; larger K falls below
  const double mu = 0.7;
  const double mode_density = 1.0 / (4.0 * mu);
  for (int k = 2; k <= 6; ++k) {
    Matrix densities = Matrix::Constant(k, k, mode_density);
    const double bound = convexity_parameter_lemma_bound(densities);
    if (k == 2) {
      EXPECT_NEAR(bound, mu, 1e-14);
    } else {
      EXPECT_LT(bound, mu);
    }
  }
}

TEST(RationalInattention, UniformAtZeroCost) {
  const Vector p = rational_inattention_solve(ChoiceModel::mnl(4, 1.0), Vector::Zero(4));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(p[i], 0.25, 1e-15);
}

TEST(RationalInattention, FrozenSoftmaxValue) {
  const Vector p = rational_inattention_solve(ChoiceModel::mnl(2, 1.0), vec({0.0, 10.0}));
  EXPECT_NEAR(p[0], 0.9999546021312976, 1e-13);
  EXPECT_NEAR(p[1], 4.5397868702434395e-05, 1e-16);
}

TEST(RationalInattention, MatchesProbabilitiesAtNegatedCost) {
  Rng rng(28);
  for (const ChoiceModel& model : {ChoiceModel::mnl(4, 0.55), kTwoNest}) {
    const Eigen::Index k = model.alternatives();
    for (int trial = 0; trial < 100; ++trial) {
      const Vector g = random_utilities(rng, k, 2.0);
      EXPECT_LT((rational_inattention_solve(model, g) - probabilities(model, -g))
                    .lpNorm<Eigen::Infinity>(),
                1e-10);
    }
  }
}

TEST(RationalInattention, MinimizesTheVariationalObjective) {
  // independent check against exhaustive search on the simplex
  const auto model = ChoiceModel::mnl(3, 0.8);
  const Vector g = vec({0.4, 1.1, 0.2});
  const auto objective = [&](const Vector& p) { return g.dot(p) + conjugate(model, p); };
  const GridMinimum grid = grid_minimize(objective, GridSpec{3, 1e-3});
  const Vector closed = rational_inattention_solve(model, g);
  EXPECT_LE(objective(closed), grid.value + 1e-12);
  EXPECT_LT((closed - grid.point).lpNorm<Eigen::Infinity>(), 2e-3);
}

TEST(SampleChoice, SymmetricBinaryFrequencies) {
  const Vector freq = sample_choice(ChoiceModel::mnl(2, 1.0), Vector::Zero(2), 1234, 1000000);
  EXPECT_NEAR(freq[0], 0.5, 0.002);
  EXPECT_NEAR(freq[1], 0.5, 0.002);
}

TEST(SampleChoice, DominantAlternative) {
  const Vector freq = sample_choice(ChoiceModel::mnl(2, 1.0), vec({100.0, 0.0}), 99, 20000);
  EXPECT_GE(freq[0], 0.9999);
}

TEST(SampleChoice, DeterministicGivenSeed) {
  const auto model = kTwoNest;
  const Vector u = vec({0.2, -0.1, 0.4});
  const Vector a = sample_choice(model, u, 555, 10000);
  const Vector b = sample_choice(model, u, 555, 10000);
  EXPECT_EQ((a - b).lpNorm<Eigen::Infinity>(), 0.0);
  const Vector c = sample_choice(model, u, 556, 10000);
  EXPECT_GT((a - c).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(SampleChoice, MnlMatchesClosedFormWithinThreeSigma) {
  Rng rng(29);
  const auto model = ChoiceModel::mnl(3, 0.9);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector u = random_utilities(rng, 3, 2.0);
    const int draws = 200000;
    const Vector freq = sample_choice(model, u, 1000 + trial, draws);
    const Vector p = probabilities(model, u);
    for (int i = 0; i < 3; ++i) {
      const double se = std::sqrt(p[i] * (1.0 - p[i]) / draws);
      EXPECT_NEAR(freq[i], p[i], 3.0 * se + 1e-12);
    }
  }
}

TEST(SampleChoice, NestedLogitMatchesClosedFormWithinThreeSigma) {
  Rng rng(30);
  const auto model = ChoiceModel::nested(4, {{0, 1}, {2, 3}}, {0.35, 0.9});
  for (int trial = 0; trial < 5; ++trial) {
    const Vector u = random_utilities(rng, 4, 2.0);
    const int draws = 200000;
    const Vector freq = sample_choice(model, u, 2000 + trial, draws);
    const Vector p = probabilities(model, u);
    for (int i = 0; i < 4; ++i) {
      const double se = std::sqrt(p[i] * (1.0 - p[i]) / draws);
      EXPECT_NEAR(freq[i], p[i], 3.0 * se + 1e-12);
    }
  }
}

TEST(StrongConvexity, ConjugateMeetsTheClaimedModulus) {
  for (const ChoiceModel& model :
       {ChoiceModel::mnl(3, 0.7), ChoiceModel::nested(3, {{0, 1}, {2}}, {0.5, 1.0})}) {
    const double beta = convexity_parameter(model);
    const double observed = strong_convexity_probe(
        [&](const Vector& p) { return conjugate(model, p); },
        [&](Rng& r) { return r.simplex_point(model.alternatives()); },
        [](const Vector& d) { return d.lpNorm<1>(); }, 1000, 31);
    EXPECT_GE(observed, beta - 1e-8);
  }
}
