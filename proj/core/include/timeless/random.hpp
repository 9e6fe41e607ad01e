#pragma once

#include <cstdint>
#include <random>

#include "timeless/linalg.hpp"

namespace timeless {

/// Seeded generator with platform-independent output. std::mt19937_64 is
/// fully specified; the distributions below are written out by hand because
/// the standard library ones are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi);
  double normal();

  /// Random Hermitian matrix with iid complex normal entries, symmetrized.
  ComplexMatrix hermitian(Eigen::Index n);
  ComplexVector unit_vector(Eigen::Index n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace timeless
