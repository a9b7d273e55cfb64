#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "hhemb/error.hpp"
#include "hhemb/linalg.hpp"

using namespace hhemb;

namespace {

double reconstruction(const Matrix& a, const SymEig& e) {
  return max_abs(e.vectors * e.values.asDiagonal() * e.vectors.transpose() - a);
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an hhemb::Error");
  return ErrorCode::Overflow;
}

}  // namespace

TEST_CASE("sym_eig: identity and 2x2 analytic cases") {
  const SymEig e = sym_eig(Matrix::Identity(3, 3));
  CHECK(max_abs(e.values - Vector::Ones(3)) < 1e-14);
  CHECK(max_abs(e.vectors.transpose() * e.vectors - Matrix::Identity(3, 3)) < 1e-12);

  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  const SymEig f = sym_eig(a);
  CHECK(f.values(0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(f.values(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("sym_eig: 6-site ring adjacency matches -2 cos(2 pi k / 6)") {
  Matrix h = Matrix::Zero(6, 6);
  for (int s = 0; s < 6; ++s) h(s, (s + 1) % 6) = h((s + 1) % 6, s) = 1.0;
  const SymEig e = sym_eig(h);
  std::vector<double> expect;
  for (int k = 0; k < 6; ++k) expect.push_back(2.0 * std::cos(2.0 * M_PI * k / 6));
  std::sort(expect.begin(), expect.end());
  for (int k = 0; k < 6; ++k) CHECK(std::abs(e.values(k) - expect[k]) < 1e-12);
  CHECK(reconstruction(h, e) < 1e-10);
}

TEST_CASE("sym_eig: contract on random matrices, trace equals eigenvalue sum") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 30;
    const Matrix a = testutil::random_symmetric(rng, n);
    const SymEig e = sym_eig(a);
    const double scale = std::max(1.0, max_abs(a));
    CHECK(reconstruction(a, e) <= 1e-10 * scale);
    CHECK(max_abs(e.vectors.transpose() * e.vectors - Matrix::Identity(n, n)) < 1e-12);
    for (int i = 1; i < n; ++i) CHECK(e.values(i) >= e.values(i - 1));
    CHECK(std::abs(e.values.sum() - a.trace()) <= 1e-10 * n * scale);
    for (int i = 0; i < n; ++i)
      CHECK((a * e.vectors.col(i) - e.values(i) * e.vectors.col(i)).cwiseAbs().maxCoeff() <= 1e-10 * scale);
  }
}

TEST_CASE("sym_eig: rejects asymmetric input") {
  Matrix a(2, 2);
  a << 1, 2, 2.001, 1;
  CHECK(code_of([&] { sym_eig(a); }) == ErrorCode::NotSymmetric);
  CHECK(code_of([&] { sym_eig(Matrix::Zero(2, 3)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("spd_sqrt: analytic examples") {
  CHECK(max_abs(spd_sqrt(Matrix::Identity(4, 4)) - Matrix::Identity(4, 4)) < 1e-14);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 9;
  const Matrix z = spd_sqrt(d);
  CHECK(z(0, 0) == doctest::Approx(2.0));
  CHECK(z(1, 1) == doctest::Approx(3.0));
  CHECK(std::abs(z(0, 1)) < 1e-14);

  Matrix a(2, 2);
  a << 2, 1, 1, 2;
  const Matrix r = spd_sqrt(a);
  CHECK(max_abs(r * r - a) < 1e-12);
  CHECK(asymmetry(r) < 1e-15);
  CHECK(sym_eig(r).values.minCoeff() > 0);
}

TEST_CASE("spd_sqrt: 1000 random SPD matrices square back") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 20;
    Matrix b(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b(i, j) = nd(rng);
    const Matrix a = b * b.transpose() + 0.1 * Matrix::Identity(n, n);
    const Matrix z = spd_sqrt(a);
    REQUIRE(max_abs(z * z - a) <= 1e-10 * std::max(1.0, max_abs(a)));
    REQUIRE(sym_eig(z).values.minCoeff() > 0);
  }
}

TEST_CASE("spd_sqrt: indefinite or singular input is rejected") {
  Matrix a(2, 2);
  a << 1, 2, 2, 1;
  CHECK(code_of([&] { spd_sqrt(a); }) == ErrorCode::NotPositiveDefinite);
  CHECK(code_of([&] { spd_sqrt(Matrix::Zero(3, 3)); }) == ErrorCode::NotPositiveDefinite);
}

TEST_CASE("solve: identity, scalar and construct-then-solve") {
  std::mt19937_64 rng(3);
  const Matrix b = testutil::random_symmetric(rng, 4).leftCols(2);
  CHECK(max_abs(solve(Matrix::Identity(4, 4), b) - b) < 1e-15);
  CHECK(solve(Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 1.0))(0, 0) == doctest::Approx(0.5));

  for (int trial = 0; trial < 200; ++trial) {
    const int n = 5;
    const Matrix q1 = testutil::random_orthogonal(rng, n), q2 = testutil::random_orthogonal(rng, n);
    Vector s(n);
    const double cond = std::pow(10.0, trial % 6);  // up to 1e5, below the 1e6 bound
    for (int i = 0; i < n; ++i) s(i) = std::pow(cond, -static_cast<double>(i) / (n - 1));
    const Matrix a = q1 * s.asDiagonal() * q2;
    const Matrix x = testutil::random_symmetric(rng, n).leftCols(3);
    const Matrix got = solve(a, a * x);
    CHECK(max_abs(got - x) <= 1e-9 * std::max(1.0, max_abs(x)));
    CHECK(max_abs(a * got - a * x) <= 1e-9 * std::max(1.0, max_abs(a) * max_abs(got)));
  }
  Matrix diag5 = Matrix::Identity(5, 5);
  for (int i = 0; i < 5; ++i) diag5(i, i) = 1.0 + i;
  const Matrix x5 = Matrix::Constant(5, 1, 0.3);
  CHECK(max_abs(solve(diag5, diag5 * x5) - x5) < 1e-10);
}

TEST_CASE("solve: singular and mismatched input") {
  Matrix a(2, 2);
  a << 1, 2, 2, 4;
  CHECK(code_of([&] { solve(a, Matrix::Identity(2, 2)); }) == ErrorCode::Singular);
  CHECK(code_of([&] { solve(Matrix::Identity(2, 2), Matrix::Identity(3, 3)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("orthonormalize spans the input columns") {
  std::mt19937_64 rng(5);
  const Matrix a = testutil::random_symmetric(rng, 6).leftCols(3);
  const Matrix q = orthonormalize(a);
  CHECK(max_abs(q.transpose() * q - Matrix::Identity(3, 3)) < 1e-12);
  CHECK(max_abs(q * q.transpose() * a - a) < 1e-12);
}
