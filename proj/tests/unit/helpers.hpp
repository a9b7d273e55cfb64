#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "hhemb/linalg.hpp"

namespace testutil {

using hhemb::Matrix;
using hhemb::Vector;

inline Matrix random_symmetric(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = nd(rng);
  return a;
}

inline Matrix random_orthogonal(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ();
}

// gamma_pq = (1/L) sum_occ cos(k (p - q)) for a periodic tight-binding ring, k = 2 pi j / L.
inline Matrix ring_density_ksum(int L, const std::vector<int>& occupied_j) {
  Matrix g = Matrix::Zero(L, L);
  for (int p = 0; p < L; ++p)
    for (int q = 0; q < L; ++q)
      for (int j : occupied_j) g(p, q) += std::cos(2.0 * M_PI * j * (p - q) / L) / L;
  return g;
}

}  // namespace testutil
