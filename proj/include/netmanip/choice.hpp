#pragma once

#include <cstdint>
#include <vector>

#include "netmanip/types.hpp"

namespace netmanip {

/// Additive-random-utility choice model over K alternatives.  Two closed-form
/// families are supported: multinomial logit (IID Gumbel errors with scale mu)
/// and nested logit (alternatives partitioned into nests, per-nest scale
/// mu_l in (0, 1]).
class ChoiceModel {
 public:
  enum class Kind { Mnl, Nl };

  static ChoiceModel mnl(int alternatives, double mu);

  /// `nests` must partition {0, ..., alternatives-1}; one scale per nest.
  static ChoiceModel nested(int alternatives, std::vector<std::vector<int>> nests,
                            std::vector<double> nest_mu);

  Kind kind() const { return kind_; }
  int alternatives() const { return k_; }
  double mu() const { return mu_; }
  const std::vector<std::vector<int>>& nests() const { return nests_; }
  const std::vector<double>& nest_mu() const { return nest_mu_; }
  int nest_of(int alternative) const { return nest_of_[alternative]; }

 private:
  ChoiceModel() = default;

  Kind kind_ = Kind::Mnl;
  int k_ = 0;
  double mu_ = 1.0;                      // MNL scale
  std::vector<std::vector<int>> nests_;  // NL partition
  std::vector<double> nest_mu_;          // NL per-nest scales
  std::vector<int> nest_of_;
};

/// Choice probabilities for deterministic utilities u (softmax for MNL, the
/// two-level nested formula for NL; log-sum-exp evaluated with max
/// subtraction throughout).
ChoiceProbabilities probabilities(const ChoiceModel& model, const Vector& u);

/// Expected maximum utility E(u) under zero-mean errors.  MNL:
/// mu * log sum exp(u/mu); NL: the nested log-sum-exp analogue.  Convex,
/// and grad E = probabilities (Williams-Daly-Zachary).
double surplus(const ChoiceModel& model, const Vector& u);

/// Convex conjugate E*(p) of the surplus.  MNL: mu * sum p log p with
/// 0 log 0 = 0; NL adds the (1-mu_l)-weighted nest-aggregate entropies.
/// Finite on the whole simplex.
double conjugate(const ChoiceModel& model, const Vector& p);

/// Gradient of the conjugate; defined on the interior of the simplex only.
Vector conjugate_gradient(const ChoiceModel& model, const Vector& p);

/// Strong-convexity parameter of E* w.r.t. the l1 norm: mu for MNL,
/// min_l mu_l for NL.
double convexity_parameter(const ChoiceModel& model);

/// Generic lower bound on the convexity parameter from the mode densities
/// of the pairwise error differences: 1 / (2 * sum over ordered pairs
/// k != m of density(k, m)).  Diagonal entries are ignored; any non-finite
/// off-diagonal entry raises MissingPair.
double convexity_parameter_lemma_bound(const Matrix& mode_densities);

/// argmin over the simplex of <cost, p> + E*(p), i.e. the rational
/// inattention problem.  By conjugate duality this equals
/// probabilities(model, -cost); the identity is the implementation.
ChoiceProbabilities rational_inattention_solve(const ChoiceModel& model, const Vector& cost);

/// Empirical argmax frequencies of u + eps over `draws` IID error samples;
/// deterministic given the seed.  MNL draws Gumbel errors with location
/// -gamma*mu (zero mean).  NL uses the two-stage construction: a scale-one
/// Gumbel on the nest inclusive values, then within-nest Gumbels scaled by
/// mu_l.  Every draw consumes a fixed number of variates, so streams are
/// reproducible.
Vector sample_choice(const ChoiceModel& model, const Vector& u, std::uint64_t seed, int draws);

}  // namespace netmanip
