#include "hhemb/householder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hhemb/error.hpp"

namespace hhemb {

namespace {

constexpr double kSymTol = 1e-10;
constexpr double kIdemTol = 1e-10;
constexpr double kZeroColumn = 1e-14;
constexpr double kCouplingTol = 1e-10;
constexpr double kSigmaTol = 1e-10;

void check_symmetric(const Matrix& g, const char* who) {
  if (g.rows() != g.cols()) fail(ErrorCode::DimensionMismatch, std::string(who) + ": density is not square");
  const double asym = asymmetry(g);
  if (asym > kSymTol * std::max(1.0, max_abs(g)))
    fail(ErrorCode::NotSymmetric, std::string(who) + ": density asymmetry " + std::to_string(asym));
}

bool whole_system(const HouseholderResult& hr) { return 2 * hr.n_frag > hr.r.rows(); }

}  // namespace

double idempotency_error(const Matrix& gamma) { return max_abs(gamma * gamma - gamma); }

DensityMatrix make_density(const Matrix& gamma, int n_elec_per_spin) {
  check_symmetric(gamma, "make_density");
  DensityMatrix dm{gamma, n_elec_per_spin, false};
  dm.idempotent = idempotency_error(gamma) <= kIdemTol;
  return dm;
}

FragmentPartition make_partition(int n_total, const std::vector<int>& fragment) {
  FragmentPartition p;
  std::vector<char> used(std::max(n_total, 0), 0);
  for (int f : fragment) {
    if (f < 0 || f >= n_total || used[f])
      fail(ErrorCode::BadPartition, "fragment index " + std::to_string(f) + " invalid or repeated");
    used[f] = 1;
    p.order.push_back(f);
  }
  for (int i = 0; i < n_total; ++i)
    if (!used[i]) p.order.push_back(i);
  p.n_frag = static_cast<int>(fragment.size());
  validate_partition(p, n_total);
  return p;
}

void validate_partition(const FragmentPartition& frag, int n_total) {
  if (static_cast<int>(frag.order.size()) != n_total)
    fail(ErrorCode::BadPartition, "order has " + std::to_string(frag.order.size()) + " entries, expected " +
                                      std::to_string(n_total));
  std::vector<char> seen(n_total, 0);
  for (int i : frag.order) {
    if (i < 0 || i >= n_total || seen[i]) fail(ErrorCode::BadPartition, "order is not a permutation");
    seen[i] = 1;
  }
  if (frag.n_frag < 1) fail(ErrorCode::BadPartition, "fragment is empty");
  if (2 * frag.n_frag > n_total && frag.n_frag != n_total)
    fail(ErrorCode::BadPartition, "2N = " + std::to_string(2 * frag.n_frag) + " exceeds " + std::to_string(n_total));
}

Matrix permute(const Matrix& a, const std::vector<int>& order) {
  const int n = static_cast<int>(order.size());
  Matrix out(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out(i, j) = a(order[i], order[j]);
  return out;
}

Matrix unpermute(const Matrix& a, const std::vector<int>& order) {
  const int n = static_cast<int>(order.size());
  Matrix out(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out(order[i], order[j]) = a(i, j);
  return out;
}

ScalarReflection scalar_householder(const Vector& x, int pivot) {
  const int n = static_cast<int>(x.size());
  if (pivot < 0 || pivot >= n) fail(ErrorCode::DimensionMismatch, "scalar_householder: pivot out of range");
  ScalarReflection out{Matrix::Identity(n, n), ReflectionStatus::AlreadySparse};
  const int head = pivot + 1;
  if (head >= n) return out;
  const Vector tail = x.tail(n - head);
  const double norm = tail.norm();
  if (norm < kZeroColumn) {
    out.status = ReflectionStatus::ZeroColumn;
    return out;
  }
  if (tail.size() == 1 || tail.tail(tail.size() - 1).norm() == 0.0) return out;
  const double y = (tail(0) >= 0.0 ? -1.0 : 1.0) * norm;
  Vector v = Vector::Zero(n);
  v.tail(n - head) = tail;
  v(head) -= y;
  v /= v.norm();
  out.r -= 2.0 * v * v.transpose();
  out.status = ReflectionStatus::Reflected;
  return out;
}

ColumnBlocks partition_columns(const DensityMatrix& dm, const FragmentPartition& frag) {
  const int L = static_cast<int>(dm.gamma.rows());
  validate_partition(frag, L);
  const int N = frag.n_frag;
  if (2 * N > L) fail(ErrorCode::BadPartition, "2N exceeds the number of orbitals");
  Matrix x(L, N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < L; ++i) x(i, j) = dm.gamma(frag.order[i], frag.order[j]);
  return {x.topRows(N), x.middleRows(N, N), x.bottomRows(L - 2 * N)};
}

HouseholderResult build_block_householder(const DensityMatrix& dm, const FragmentPartition& frag,
                                          const HouseholderOptions& opts) {
  check_symmetric(dm.gamma, "build_block_householder");
  const int L = static_cast<int>(dm.gamma.rows());
  validate_partition(frag, L);
  const int N = frag.n_frag;

  HouseholderResult hr;
  hr.n_frag = N;
  hr.order = frag.order;
  hr.idempotent_source = dm.idempotent;
  if (N == L) {
    hr.r = Matrix::Identity(L, L);
    hr.v = Matrix::Zero(L, N);
    hr.w = Matrix(0, N);
    hr.gamma_tilde = permute(dm.gamma, hr.order);
    return hr;
  }

  if (opts.pivot) {
    Matrix xt(L - N, N);
    for (int j = 0; j < N; ++j)
      for (int i = N; i < L; ++i) xt(i - N, j) = dm.gamma(frag.order[i], frag.order[j]);
    Eigen::ColPivHouseholderQR<Matrix> qr(xt.transpose());
    const auto& perm = qr.colsPermutation().indices();
    std::vector<int> env(frag.order.begin() + N, frag.order.end());
    std::vector<char> taken(L - N, 0);
    for (int k = 0; k < N; ++k) {
      hr.order[N + k] = env[perm(k)];
      taken[perm(k)] = 1;
    }
    int pos = 2 * N;
    for (int k = 0; k < L - N; ++k)
      if (!taken[k]) hr.order[pos++] = env[k];
  }

  const Matrix g = permute(dm.gamma, hr.order);
  const Matrix g1 = g.block(N, 0, N, N);
  const Matrix g2 = g.block(2 * N, 0, L - 2 * N, N);

  Eigen::JacobiSVD<Matrix> svd(g1);
  const double smin = svd.singularValues().minCoeff();
  if (smin < kCouplingTol * std::max(max_abs(dm.gamma), 1e-300))
    fail(ErrorCode::SingularCoupling, "smallest singular value of gamma1 is " + std::to_string(smin));

  // Lambda = g2 g1^-1, i.e. g1^T Lambda^T = g2^T.
  const Matrix lambda = solve(g1.transpose(), g2.transpose()).transpose();
  const Matrix m2 = Matrix::Identity(N, N) + lambda.transpose() * lambda;
  const Matrix m = spd_sqrt(m2);
  hr.w = m * g1;

  hr.v = Matrix::Zero(L, N);
  hr.v.block(N, 0, N, N) = g1 + hr.w;
  hr.v.block(2 * N, 0, L - 2 * N, N) = g2;

  const Matrix s = hr.v.transpose() * hr.v;
  const Matrix sinv = solve(s, Matrix::Identity(N, N));
  const Matrix vs = hr.v * sinv;  // L x N
  hr.r = Matrix::Identity(L, L) - 2.0 * vs * hr.v.transpose();
  hr.r.topRows(N) = Matrix::Identity(N, L);
  hr.r.leftCols(N) = Matrix::Identity(L, N);

  const Matrix a = hr.v.transpose() * g;  // N x L
  const Matrix b = a * hr.v;              // N x N
  const Matrix t = vs * a;                // L x L
  hr.gamma_tilde = g - 2.0 * t - 2.0 * t.transpose() + 4.0 * vs * b * vs.transpose();
  hr.gamma_tilde = 0.5 * (hr.gamma_tilde + hr.gamma_tilde.transpose());
  return hr;
}

int cluster_size(const HouseholderResult& hr) {
  return whole_system(hr) ? hr.n_frag : 2 * hr.n_frag;
}

ClusterBlocks cluster_blocks(const HouseholderResult& hr) {
  const int L = static_cast<int>(hr.gamma_tilde.rows());
  const int N = hr.n_frag;
  const Matrix& g = hr.gamma_tilde;
  ClusterBlocks cb;
  cb.gamma_ff = g.topLeftCorner(N, N);
  if (whole_system(hr)) {
    cb.gamma_bf = cb.gamma_ef = Matrix(0, N);
    cb.gamma_bb = cb.gamma_eb = cb.gamma_ee = Matrix(0, 0);
    return cb;
  }
  const int E = L - 2 * N;
  cb.gamma_bf = g.block(N, 0, N, N);
  cb.gamma_bb = g.block(N, N, N, N);
  cb.gamma_eb = g.block(2 * N, N, E, N);
  cb.gamma_ee = g.block(2 * N, 2 * N, E, E);
  cb.gamma_ef = g.block(2 * N, 0, E, N);
  return cb;
}

Matrix cluster_coeffs(const HouseholderResult& hr) {
  const int L = static_cast<int>(hr.r.rows());
  const int nc = cluster_size(hr);
  Matrix c(L, nc);
  for (int j = 0; j < nc; ++j)
    for (int i = 0; i < L; ++i) c(hr.order[i], j) = hr.r(i, j);
  return c;
}

Matrix environment_density(const HouseholderResult& hr) {
  const int L = static_cast<int>(hr.r.rows());
  const int nc = cluster_size(hr);
  const int E = L - nc;
  if (E == 0) return Matrix::Zero(L, L);
  Matrix renv(L, E);
  for (int j = 0; j < E; ++j)
    for (int i = 0; i < L; ++i) renv(hr.order[i], j) = hr.r(i, nc + j);
  const Matrix gee = hr.gamma_tilde.bottomRightCorner(E, E);
  return renv * gee * renv.transpose();
}

BathSpace householder_bath(const HouseholderResult& hr) {
  const Matrix c = cluster_coeffs(hr);
  return {c.rightCols(c.cols() - hr.n_frag), std::nullopt};
}

BathSpace svd_bath(const DensityMatrix& dm, const FragmentPartition& frag) {
  check_symmetric(dm.gamma, "svd_bath");
  if (!dm.idempotent) fail(ErrorCode::NonIdempotentSource, "svd_bath requires an idempotent density");
  const int L = static_cast<int>(dm.gamma.rows());
  validate_partition(frag, L);
  const int N = frag.n_frag;
  if (2 * N > L) fail(ErrorCode::BadPartition, "2N exceeds the number of orbitals");

  const SymEig occ = sym_eig(dm.gamma);
  int m = 0;
  for (int i = 0; i < L; ++i)
    if (occ.values(i) > 0.5) ++m;
  const Matrix c_occ = occ.vectors.rightCols(m);

  Matrix s(N, m);
  for (int i = 0; i < N; ++i) s.row(i) = c_occ.row(frag.order[i]);
  // Thin SVD S = U sigma V^T from the N x N Gram matrix S S^T = U sigma^2 U^T.
  const SymEig gram = sym_eig(s * s.transpose());
  Vector sigma(N);
  for (int k = 0; k < N; ++k) {
    const double s2 = gram.values(k);
    if (s2 <= kSigmaTol * kSigmaTol)
      fail(ErrorCode::DegenerateSingularValue, "fragment decoupled from the occupied space");
    sigma(k) = std::sqrt(s2);
    if (sigma(k) >= 1.0 - kSigmaTol)
      fail(ErrorCode::DegenerateSingularValue, "singular value " + std::to_string(sigma(k)) + " reaches 1");
  }
  const Matrix vr = s.transpose() * gram.vectors * sigma.cwiseInverse().asDiagonal();  // m x N
  Matrix kappa = c_occ * vr;  // rotated occupied orbitals
  for (int i = 0; i < N; ++i) kappa.row(frag.order[i]).setZero();
  for (int k = 0; k < N; ++k) kappa.col(k) /= std::sqrt(1.0 - sigma(k) * sigma(k));
  return {kappa, sigma};
}

double subspace_distance(const BathSpace& a, const BathSpace& b) {
  if (a.coeffs.rows() != b.coeffs.rows() || a.coeffs.cols() != b.coeffs.cols())
    fail(ErrorCode::DimensionMismatch, "subspace_distance: shapes differ");
  const Matrix qa = orthonormalize(a.coeffs);
  const Matrix qb = orthonormalize(b.coeffs);
  return max_abs(qa * qa.transpose() - qb * qb.transpose());
}

}  // namespace hhemb
