#include "neuronlab/geometry.hpp"

#include <cmath>

namespace neuronlab {

std::optional<double> angle_between(const Vector& w, const Vector& v) {
  const double nw = w.norm();
  const double nv = v.norm();
  if (nw == 0.0 || nv == 0.0) return std::nullopt;
  const Vector a = w / nw;
  const Vector b = v / nv;
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return seed ^ splitmix64(index);
}

Vector random_unit_vector(int dim, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector u(dim);
  do {
    for (int i = 0; i < dim; ++i) u[i] = normal(rng);
  } while (u.norm() == 0.0);
  return u / u.norm();
}

}  // namespace neuronlab
