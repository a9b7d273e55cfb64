#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "hhemb/linalg.hpp"

namespace hhemb {

// Dense rank-4 tensor, chemist order (pq|rs), row-major over p,q,r,s.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

  int n() const { return n_; }
  double& operator()(int p, int q, int r, int s) { return data_[index(p, q, r, s)]; }
  double operator()(int p, int q, int r, int s) const { return data_[index(p, q, r, s)]; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  // Writes v into all eight permutationally equivalent slots.
  void set_sym(int p, int q, int r, int s, double v);
  double max_symmetry_error() const;
  double max_abs() const;

 private:
  std::size_t index(int p, int q, int r, int s) const {
    return ((static_cast<std::size_t>(p) * n_ + q) * n_ + r) * n_ + s;
  }
  int n_ = 0;
  std::vector<double> data_;
};

// Hubbard-type interaction sum_s u_s n_{s,up} n_{s,dn}: (pq|rs) = u_p when all indices equal.
struct OnSiteInteraction {
  Vector u;
};

using TwoBody = std::variant<OnSiteInteraction, Tensor4>;

int two_body_dim(const TwoBody& g);
Tensor4 to_tensor(const TwoBody& g);

// g'(pq|rs) = sum c_ap c_bq c_cr c_ds g(ab|cd) as four one-index passes.
Tensor4 transform_tensor(const Tensor4& g, const Matrix& c);
Tensor4 transform_tensor(const TwoBody& g, const Matrix& c);

// Closed-shell Fock-like contraction J[d] - K[d]/2 for a spin-summed density d.
Matrix coulomb_exchange(const TwoBody& g, const Matrix& d);

}  // namespace hhemb
