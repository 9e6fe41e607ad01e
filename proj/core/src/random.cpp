#include "timeless/random.hpp"

#include <cmath>
#include <numbers>

namespace timeless {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t Rng::integer(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(engine_() % span);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

ComplexMatrix Rng::hermitian(Eigen::Index n) {
  ComplexMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double re = normal();
      a(i, j) = Complex(re, normal());
    }
  }
  return 0.5 * (a + a.adjoint());
}

ComplexVector Rng::unit_vector(Eigen::Index n) {
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = normal();
    v(i) = Complex(re, normal());
  }
  return v / v.norm();
}

}  // namespace timeless
