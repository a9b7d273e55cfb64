#include "hhemb/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "hhemb/error.hpp"

namespace hhemb {

void Tensor4::set_sym(int p, int q, int r, int s, double v) {
  auto& t = *this;
  t(p, q, r, s) = v;
  t(q, p, r, s) = v;
  t(p, q, s, r) = v;
  t(q, p, s, r) = v;
  t(r, s, p, q) = v;
  t(s, r, p, q) = v;
  t(r, s, q, p) = v;
  t(s, r, q, p) = v;
}

double Tensor4::max_symmetry_error() const {
  const auto& t = *this;
  double err = 0.0;
  for (int p = 0; p < n_; ++p)
    for (int q = 0; q < n_; ++q)
      for (int r = 0; r < n_; ++r)
        for (int s = 0; s < n_; ++s) {
          const double v = t(p, q, r, s);
          err = std::max({err, std::abs(v - t(q, p, r, s)), std::abs(v - t(p, q, s, r)),
                          std::abs(v - t(r, s, p, q))});
        }
  return err;
}

double Tensor4::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

int two_body_dim(const TwoBody& g) {
  if (const auto* os = std::get_if<OnSiteInteraction>(&g)) return static_cast<int>(os->u.size());
  return std::get<Tensor4>(g).n();
}

Tensor4 to_tensor(const TwoBody& g) {
  if (const auto* t = std::get_if<Tensor4>(&g)) return *t;
  const auto& u = std::get<OnSiteInteraction>(g).u;
  Tensor4 out(static_cast<int>(u.size()));
  for (int s = 0; s < u.size(); ++s) out(s, s, s, s) = u(s);
  return out;
}

namespace {

// out(i, b, c, d) = sum_a c(a, i) in(b, c, d, a): contracts the last index and rotates it to the front.
std::vector<double> one_index_pass(const std::vector<double>& in, int n_in, const std::vector<int>& dims,
                                   const Matrix& c) {
  const int m = static_cast<int>(c.cols());
  const std::size_t block = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  std::vector<double> out(static_cast<std::size_t>(m) * block, 0.0);
  for (std::size_t x = 0; x < block; ++x) {
    const double* row = &in[x * n_in];
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int a = 0; a < n_in; ++a) acc += c(a, i) * row[a];
      out[static_cast<std::size_t>(i) * block + x] = acc;
    }
  }
  return out;
}

}  // namespace

Tensor4 transform_tensor(const Tensor4& g, const Matrix& c) {
  const int n = g.n();
  if (c.rows() != n) fail(ErrorCode::DimensionMismatch, "transform_tensor: coefficient rows differ from tensor order");
  const int m = static_cast<int>(c.cols());
  // Each pass consumes the trailing index and prepends the transformed one:
  // (pqrs) -> (s'pqr) -> (r's'pq) -> (q'r's'p) -> (p'q'r's').
  std::vector<double> cur = g.data();
  std::vector<int> dims = {n, n, n};
  cur = one_index_pass(cur, n, dims, c);
  dims = {m, n, n};
  cur = one_index_pass(cur, n, dims, c);
  dims = {m, m, n};
  cur = one_index_pass(cur, n, dims, c);
  dims = {m, m, m};
  cur = one_index_pass(cur, n, dims, c);
  Tensor4 out(m);
  out.data() = std::move(cur);
  return out;
}

Tensor4 transform_tensor(const TwoBody& g, const Matrix& c) {
  if (const auto* t = std::get_if<Tensor4>(&g)) return transform_tensor(*t, c);
  const auto& u = std::get<OnSiteInteraction>(g).u;
  if (c.rows() != u.size()) fail(ErrorCode::DimensionMismatch, "transform_tensor: coefficient rows differ from sites");
  const int m = static_cast<int>(c.cols());
  Tensor4 out(m);
  for (int s = 0; s < u.size(); ++s) {
    if (u(s) == 0.0) continue;
    for (int p = 0; p < m; ++p) {
      const double a = u(s) * c(s, p);
      if (a == 0.0) continue;
      for (int q = 0; q < m; ++q) {
        const double b = a * c(s, q);
        for (int r = 0; r < m; ++r) {
          const double e = b * c(s, r);
          for (int t = 0; t < m; ++t) out(p, q, r, t) += e * c(s, t);
        }
      }
    }
  }
  return out;
}

Matrix coulomb_exchange(const TwoBody& g, const Matrix& d) {
  const int n = two_body_dim(g);
  if (d.rows() != n || d.cols() != n) fail(ErrorCode::DimensionMismatch, "coulomb_exchange: density size");
  Matrix f = Matrix::Zero(n, n);
  if (const auto* os = std::get_if<OnSiteInteraction>(&g)) {
    for (int s = 0; s < n; ++s) f(s, s) = 0.5 * os->u(s) * d(s, s);
    return f;
  }
  const auto& t = std::get<Tensor4>(g);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      double acc = 0.0;
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) acc += d(r, s) * (t(p, q, r, s) - 0.5 * t(p, s, r, q));
      f(p, q) = acc;
    }
  return f;
}

}  // namespace hhemb
