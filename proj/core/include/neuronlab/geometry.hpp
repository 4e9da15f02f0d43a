#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include <Eigen/Dense>

namespace neuronlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Angle between two vectors in [0, pi], or nullopt if either is zero.
///
/// Uses 2*atan2(|u - v|, |u + v|) on the normalized vectors, which keeps
/// full relative precision near 0 and pi where acos of the cosine does not.
std::optional<double> angle_between(const Vector& w, const Vector& v);

/// Stateless 64-bit mixer (splitmix64 finalizer).
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for the index-th independent stream derived from a base seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Uniformly distributed unit vector in R^dim.
Vector random_unit_vector(int dim, Rng& rng);

}  // namespace neuronlab
