#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "netmanip/types.hpp"

namespace netmanip {

// Deterministic random source.  Doubles are built directly from the
// mt19937_64 bit stream so that streams are bit-identical across standard
// library implementations (std::uniform_real_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform draw on the open interval (0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  /// Standard Gumbel (location 0, scale 1).
  double gumbel() { return -std::log(-std::log(uniform01())); }

  /// Uniform point of the standard simplex (normalized exponentials).
  Vector simplex_point(Eigen::Index dim) {
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = -std::log(uniform01());
    return v / v.sum();
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace netmanip
