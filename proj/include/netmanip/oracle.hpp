#pragma once

#include <cstdint>
#include <functional>

#include "netmanip/choice.hpp"
#include "netmanip/rng.hpp"
#include "netmanip/types.hpp"

namespace netmanip {

/// Barycentric grid on the standard simplex: all compositions of
/// ceil(1/resolution) into `dimension` parts.  Dimensions above four are
/// rejected (combinatorial guard).
struct GridSpec {
  int dimension = 2;
  double resolution = 1e-3;
};

struct GridMinimum {
  Vector point;
  double value = 0.0;
  /// lipschitz * resolution when a Lipschitz estimate was supplied, else 0.
  double error_bound = 0.0;
};

using Objective = std::function<double(const Vector&)>;

/// Exhaustive minimization over the barycentric grid.  The true optimum is
/// missed by at most lipschitz * resolution in value.
GridMinimum grid_minimize(const Objective& objective, const GridSpec& spec,
                          double lipschitz = 0.0);

struct McEstimate {
  Vector freq;
  Vector se;  // binomial standard error per component
};

/// Monte-Carlo choice frequencies with standard errors; wraps sample_choice.
McEstimate mc_choice_probabilities(const ChoiceModel& model, const Vector& u, int draws,
                                   std::uint64_t seed);

/// Central finite differences, componentwise.
Vector fd_gradient(const Objective& f, const Vector& u, double h);

/// Empirical strong-convexity modulus: the infimum over random pairs from
/// `sample` and alpha in {0.1, ..., 0.9} of
///   2 [a F(x) + (1-a) F(y) - F(a x + (1-a) y)] / (a (1-a) ||x-y||^2).
/// Pairs closer than 0.05 in the probed norm are resampled so the quotient
/// stays well clear of rounding noise.
double strong_convexity_probe(const Objective& f, const std::function<Vector(Rng&)>& sample,
                              const std::function<double(const Vector&)>& norm, int pairs,
                              std::uint64_t seed);

}  // namespace netmanip
