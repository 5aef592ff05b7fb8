#include "netmanip/oracle.hpp"

#include <cmath>
#include <limits>

namespace netmanip {

namespace {

// number of barycentric grid points: C(m + d - 1, d - 1)
double composition_count(long long m, int d) {
  double c = 1.0;
  for (int i = 1; i <= d - 1; ++i) c *= static_cast<double>(m + i) / static_cast<double>(i);
  return c;
}

constexpr double kMaxGridPoints = 5e7;

}  // namespace

GridMinimum grid_minimize(const Objective& objective, const GridSpec& spec, double lipschitz) {
  if (spec.dimension < 1 || spec.dimension > 4)
    throw GridTooLarge("grid dimension must lie in [1, 4], got " +
                       std::to_string(spec.dimension));
  if (!(spec.resolution > 0.0)) throw GridTooLarge("grid resolution must be positive");
  const long long m = static_cast<long long>(std::ceil(1.0 / spec.resolution));
  if (composition_count(m, spec.dimension) > kMaxGridPoints)
    throw GridTooLarge("barycentric grid with " + std::to_string(m) +
                       " subdivisions in dimension " + std::to_string(spec.dimension) +
                       " is too large");

  const int d = spec.dimension;
  Vector best_point(d);
  double best_value = std::numeric_limits<double>::infinity();
  Vector point(d);
  // enumerate compositions of m into d nonnegative parts
  std::vector<long long> part(static_cast<std::size_t>(d), 0);
  part[0] = m;
  while (true) {
    for (int i = 0; i < d; ++i) point[i] = static_cast<double>(part[static_cast<std::size_t>(i)]) /
                                           static_cast<double>(m);
    const double value = objective(point);
    if (value < best_value) {
      best_value = value;
      best_point = point;
    }
    // next composition in colex order
    if (d == 1) break;
    int i = 0;
    while (i < d - 1 && part[static_cast<std::size_t>(i)] == 0) ++i;
    if (i == d - 1) break;
    const long long head = part[static_cast<std::size_t>(i)];
    part[static_cast<std::size_t>(i)] = 0;
    part[0] = head - 1;
    part[static_cast<std::size_t>(i) + 1] += 1;
  }

  GridMinimum result;
  result.point = best_point;
  result.value = best_value;
  result.error_bound = lipschitz > 0.0 ? lipschitz * spec.resolution : 0.0;
  return result;
}

McEstimate mc_choice_probabilities(const ChoiceModel& model, const Vector& u, int draws,
                                   std::uint64_t seed) {
  McEstimate est;
  est.freq = sample_choice(model, u, seed, draws);
  est.se.resize(est.freq.size());
  for (Eigen::Index i = 0; i < est.freq.size(); ++i) {
    const double p = est.freq[i];
    est.se[i] = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(draws));
  }
  return est;
}

Vector fd_gradient(const Objective& f, const Vector& u, double h) {
  if (!(h > 0.0)) throw Error("finite-difference step must be positive");
  Vector g(u.size());
  Vector probe = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    probe[i] = u[i] + h;
    const double fp = f(probe);
    probe[i] = u[i] - h;
    const double fm = f(probe);
    probe[i] = u[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double strong_convexity_probe(const Objective& f, const std::function<Vector(Rng&)>& sample,
                              const std::function<double(const Vector&)>& norm, int pairs,
                              std::uint64_t seed) {
  if (pairs < 1) throw Error("need at least one pair");
  Rng rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  constexpr double kMinSeparation = 0.05;
  for (int p = 0; p < pairs; ++p) {
    Vector x = sample(rng);
    Vector y = sample(rng);
    double dist = norm(x - y);
    int attempts = 0;
    while (dist < kMinSeparation && attempts++ < 100) {
      y = sample(rng);
      dist = norm(x - y);
    }
    if (dist < kMinSeparation) continue;
    const double fx = f(x);
    const double fy = f(y);
    for (int ai = 1; ai <= 9; ++ai) {
      const double a = 0.1 * ai;
      const double fmid = f(a * x + (1.0 - a) * y);
      const double modulus = 2.0 * (a * fx + (1.0 - a) * fy - fmid) / (a * (1.0 - a) * dist * dist);
      worst = std::min(worst, modulus);
    }
  }
  return worst;
}

}  // namespace netmanip
