#pragma once

#include <cstdint>
#include <random>

#include "pinvpert/decomposition.hpp"
#include "pinvpert/matrix.hpp"

namespace pinvpert {

using Rng = std::mt19937_64;

/// Seed for the i-th independent stream derived from a master seed (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Complex complex_gaussian(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = complex_gaussian(rng);
  return m;
}

inline Vector random_unit_vector(std::size_t n, Rng& rng) {
  Vector x(n);
  double len = 0.0;
  while (len == 0.0) {
    for (auto& z : x) z = complex_gaussian(rng);
    len = norm2(x);
  }
  for (auto& z : x) z /= len;
  return x;
}

/// n×k matrix with orthonormal columns (k ≤ n), obtained by orthonormalizing
/// independent complex Gaussian columns.
inline Matrix random_isometry(std::size_t n, std::size_t k, Rng& rng) {
  Matrix q(n, k);
  for (std::size_t j = 0; j < k; ++j) {
    Vector x;
    double len = 0.0;
    while (len < 1e-6) {
      x = random_unit_vector(n, rng);
      detail::orthogonalize_against(x, q, j);
      len = norm2(x);
    }
    for (auto& z : x) z /= len;
    q.set_col(j, x);
  }
  return q;
}

inline Matrix random_unitary(std::size_t n, Rng& rng) { return random_isometry(n, n, rng); }

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace pinvpert
