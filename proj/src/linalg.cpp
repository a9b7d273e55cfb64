#include "hhemb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hhemb/error.hpp"

namespace hhemb {

namespace {

constexpr double kSymTol = 1e-10;
constexpr double kPdFloor = 1e-12;
constexpr double kSingTol = 1e-12;

void require_square(const Matrix& a, const char* who) {
  if (a.rows() != a.cols())
    fail(ErrorCode::DimensionMismatch, std::string(who) + ": matrix is " + std::to_string(a.rows()) + "x" +
                                           std::to_string(a.cols()));
}

}  // namespace

double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double asymmetry(const Matrix& a) { return a.size() == 0 ? 0.0 : (a - a.transpose()).cwiseAbs().maxCoeff(); }

SymEig sym_eig(const Matrix& a) {
  require_square(a, "sym_eig");
  const double scale = std::max(1.0, max_abs(a));
  const double asym = asymmetry(a);
  if (asym > kSymTol * scale)
    fail(ErrorCode::NotSymmetric, "sym_eig: asymmetry " + std::to_string(asym));
  if (a.rows() == 0) return {Vector(0), Matrix(0, 0)};
  Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) fail(ErrorCode::NoConvergence, "sym_eig: eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

static Matrix spd_power(const Matrix& a, double power) {
  SymEig e = sym_eig(a);
  const double floor = kPdFloor * std::max(1.0, max_abs(a));
  if (e.values.size() > 0 && e.values.minCoeff() <= floor)
    fail(ErrorCode::NotPositiveDefinite, "min eigenvalue " + std::to_string(e.values.minCoeff()));
  Vector d = e.values.array().pow(power).matrix();
  Matrix z = e.vectors * d.asDiagonal() * e.vectors.transpose();
  return 0.5 * (z + z.transpose());
}

Matrix spd_sqrt(const Matrix& a) { return spd_power(a, 0.5); }

Matrix spd_inv_sqrt(const Matrix& a) { return spd_power(a, -0.5); }

Matrix solve(const Matrix& a, const Matrix& b) {
  require_square(a, "solve");
  if (b.rows() != a.rows()) fail(ErrorCode::DimensionMismatch, "solve: rhs rows differ from matrix order");
  if (a.rows() == 0) return Matrix(0, b.cols());
  Eigen::PartialPivLU<Matrix> lu(a);
  const double scale = max_abs(a);
  const Matrix& f = lu.matrixLU();
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    if (!(std::abs(f(i, i)) >= kSingTol * scale))
      fail(ErrorCode::Singular, "solve: pivot " + std::to_string(i) + " below threshold");
  return lu.solve(b);
}

Matrix orthonormalize(const Matrix& a) {
  if (a.cols() == 0) return Matrix(a.rows(), 0);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

}  // namespace hhemb
