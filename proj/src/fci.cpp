#include "hhemb/fci.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include "hhemb/error.hpp"

namespace hhemb {

namespace {

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<std::size_t>(std::llround(r));
}

std::vector<std::uint64_t> strings(int n_orb, int n_el) {
  std::vector<std::uint64_t> out;
  if (n_el == 0) return {0};
  std::uint64_t s = (std::uint64_t{1} << n_el) - 1;
  const std::uint64_t limit = n_orb == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_orb) - 1;
  while (s <= limit) {
    out.push_back(s);
    // Next bit pattern with the same popcount (Gosper's hack).
    const std::uint64_t c = s & (~s + 1);
    const std::uint64_t r = s + c;
    if (r == 0) break;
    s = (((r ^ s) >> 2) / c) | r;
  }
  return out;
}

struct Excitation {
  int kl;
  int target;
  double sign;
};

// E_kl = a+_k a_l on one spin channel, for every string; diagonal k = l included.
std::vector<std::vector<Excitation>> excitation_table(const std::vector<std::uint64_t>& strs, int n_orb) {
  std::unordered_map<std::uint64_t, int> addr;
  addr.reserve(strs.size() * 2);
  for (std::size_t i = 0; i < strs.size(); ++i) addr[strs[i]] = static_cast<int>(i);
  std::vector<std::vector<Excitation>> table(strs.size());
  for (std::size_t i = 0; i < strs.size(); ++i) {
    const std::uint64_t s = strs[i];
    for (int l = 0; l < n_orb; ++l) {
      if (!((s >> l) & 1)) continue;
      const std::uint64_t s1 = s ^ (std::uint64_t{1} << l);
      for (int k = 0; k < n_orb; ++k) {
        if ((s1 >> k) & 1) continue;
        const std::uint64_t s2 = s1 | (std::uint64_t{1} << k);
        const int lo = std::min(k, l), hi = std::max(k, l);
        std::uint64_t between = 0;
        if (hi - lo > 1) between = s1 & (((std::uint64_t{1} << hi) - 1) & ~((std::uint64_t{1} << (lo + 1)) - 1));
        const double sign = (std::popcount(between) & 1) ? -1.0 : 1.0;
        table[i].push_back({k * n_orb + l, addr.at(s2), sign});
      }
    }
  }
  return table;
}

struct Tables {
  std::vector<std::vector<Excitation>> alpha;
  std::vector<std::vector<Excitation>> beta;
  std::size_t nb = 0;
  std::size_t dim = 0;
  int n = 0;
};

Tables make_tables(const DeterminantBasis& basis) {
  Tables t;
  t.alpha = excitation_table(basis.alpha_strings, basis.n_orb);
  t.beta = excitation_table(basis.beta_strings, basis.n_orb);
  t.nb = basis.beta_strings.size();
  t.dim = basis.size();
  t.n = basis.n_orb;
  return t;
}

template <class F>
void for_each_excitation(const Tables& t, std::size_t J, F&& f) {
  const std::size_t ia = J / t.nb, ib = J % t.nb;
  for (const auto& e : t.alpha[ia]) f(e.kl, static_cast<std::size_t>(e.target) * t.nb + ib, e.sign);
  for (const auto& e : t.beta[ib]) f(e.kl, ia * t.nb + static_cast<std::size_t>(e.target), e.sign);
}

// D(:, kl) = E_kl c.
Matrix excitation_vectors(const Tables& t, const Vector& c) {
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(t.dim), t.n * t.n);
  for (std::size_t J = 0; J < t.dim; ++J) {
    const double cj = c(static_cast<Eigen::Index>(J));
    if (cj == 0.0) continue;
    for_each_excitation(t, J, [&](int kl, std::size_t target, double s) {
      d(static_cast<Eigen::Index>(target), kl) += s * cj;
    });
  }
  return d;
}

struct Operators {
  Vector k;  // flattened k_kl
  Matrix g;  // g(kl, mn) = (kl|mn)
};

Operators make_operators(const FciProblem& p) {
  const int n = static_cast<int>(p.h.rows());
  const Tensor4 g = to_tensor(p.g);
  Operators op;
  op.k.resize(n * n);
  op.g.resize(n * n, n * n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      double acc = p.h(k, l);
      for (int j = 0; j < n; ++j) acc -= 0.5 * g(k, j, j, l);
      op.k(k * n + l) = acc;
      for (int m = 0; m < n; ++m)
        for (int q = 0; q < n; ++q) op.g(k * n + l, m * n + q) = g(k, l, m, q);
    }
  return op;
}

void check_problem(const FciProblem& p, const DeterminantBasis& basis) {
  if (p.h.rows() != basis.n_orb || p.h.cols() != basis.n_orb || two_body_dim(p.g) != basis.n_orb)
    fail(ErrorCode::DimensionMismatch, "FCI problem and determinant basis disagree on orbital count");
  if (p.n_alpha != basis.n_alpha || p.n_beta != basis.n_beta)
    fail(ErrorCode::DimensionMismatch, "FCI problem and determinant basis disagree on electron count");
}

Vector sigma(const Tables& t, const Operators& op, double e_const, const Vector& c) {
  const Matrix d = excitation_vectors(t, c);
  Vector out = d * op.k + e_const * c;
  const Matrix gd = 0.5 * d * op.g;
  for (std::size_t J = 0; J < t.dim; ++J)
    for_each_excitation(t, J, [&](int kl, std::size_t target, double s) {
      out(static_cast<Eigen::Index>(target)) += s * gd(static_cast<Eigen::Index>(J), kl);
    });
  return out;
}

Vector diagonal(const Tables& t, const Operators& op, double e_const) {
  Vector diag = Vector::Constant(static_cast<Eigen::Index>(t.dim), e_const);
  for (std::size_t J = 0; J < t.dim; ++J) {
    double acc = 0.0;
    for_each_excitation(t, J, [&](int mn, std::size_t j1, double s1) {
      if (j1 == J) acc += op.k(mn) * s1;
      for_each_excitation(t, j1, [&](int kl, std::size_t j2, double s2) {
        if (j2 == J) acc += 0.5 * op.g(kl, mn) * s1 * s2;
      });
    });
    diag(static_cast<Eigen::Index>(J)) += acc;
  }
  return diag;
}

Matrix dense(const Tables& t, const Operators& op, double e_const) {
  const auto dim = static_cast<Eigen::Index>(t.dim);
  Matrix h = Matrix::Zero(dim, dim);
  for (std::size_t J = 0; J < t.dim; ++J) {
    const auto col = static_cast<Eigen::Index>(J);
    h(col, col) += e_const;
    for_each_excitation(t, J, [&](int mn, std::size_t j1, double s1) {
      h(static_cast<Eigen::Index>(j1), col) += op.k(mn) * s1;
      for_each_excitation(t, j1, [&](int kl, std::size_t j2, double s2) {
        h(static_cast<Eigen::Index>(j2), col) += 0.5 * op.g(kl, mn) * s1 * s2;
      });
    });
  }
  return 0.5 * (h + h.transpose());
}

struct Davidson {
  Vector values;
  Matrix vectors;
  int iterations = 0;
};

Davidson davidson(const Tables& t, const Operators& op, double e_const, int n_roots, double tol, int max_iter) {
  const auto dim = static_cast<Eigen::Index>(t.dim);
  const Vector diag = diagonal(t, op, e_const);
  std::vector<Eigen::Index> idx(dim);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return diag(a) < diag(b); });

  const Eigen::Index n_guess = std::min<Eigen::Index>(dim, std::max(2 * n_roots, 8));
  const Eigen::Index max_sub = std::min<Eigen::Index>(dim, 48);
  Matrix v = Matrix::Zero(dim, n_guess);
  for (Eigen::Index i = 0; i < n_guess; ++i) v(idx[i], i) = 1.0;
  Matrix hv(dim, n_guess);
  for (Eigen::Index i = 0; i < n_guess; ++i) hv.col(i) = sigma(t, op, e_const, v.col(i));

  Davidson out;
  for (int it = 1; it <= max_iter; ++it) {
    const Matrix hsub = v.transpose() * hv;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (hsub + hsub.transpose()));
    const Eigen::Index k = std::min<Eigen::Index>(n_roots, v.cols());
    const Matrix y = es.eigenvectors().leftCols(k);
    const Vector theta = es.eigenvalues().head(k);
    const Matrix x = v * y;
    const Matrix r = hv * y - x * theta.asDiagonal();

    std::vector<Vector> fresh;
    bool done = true;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (r.col(i).norm() < tol) continue;
      done = false;
      Vector d = r.col(i);
      for (Eigen::Index j = 0; j < dim; ++j) {
        double den = theta(i) - diag(j);
        if (std::abs(den) < 1e-8) den = den < 0 ? -1e-8 : 1e-8;
        d(j) /= den;
      }
      fresh.push_back(d);
    }
    if (done) {
      out.values = theta;
      out.vectors = x;
      out.iterations = it;
      return out;
    }
    if (v.cols() + static_cast<Eigen::Index>(fresh.size()) > max_sub) {
      const Eigen::Index keep = std::min<Eigen::Index>(es.eigenvalues().size(), std::max<Eigen::Index>(k, 4));
      const Matrix yk = es.eigenvectors().leftCols(keep);
      // Ritz vectors of an orthonormal basis stay orthonormal.
      v = Matrix(v * yk);
      hv = Matrix(hv * yk);
    }
    for (Vector& d : fresh) {
      for (int pass = 0; pass < 2; ++pass) d -= v * (v.transpose() * d);
      const double nrm = d.norm();
      if (nrm < 1e-10) continue;
      d /= nrm;
      v.conservativeResize(Eigen::NoChange, v.cols() + 1);
      v.col(v.cols() - 1) = d;
      hv.conservativeResize(Eigen::NoChange, hv.cols() + 1);
      hv.col(hv.cols() - 1) = sigma(t, op, e_const, d);
    }
    if (v.cols() == dim && fresh.empty()) break;
  }
  fail(ErrorCode::NoConvergence, "Davidson did not reach residual " + std::to_string(tol));
}

}  // namespace

DeterminantBasis enumerate(int n_orb, int n_alpha, int n_beta, std::size_t cap) {
  if (n_orb < 0 || n_orb > 64) fail(ErrorCode::Overflow, "at most 64 orbitals are supported");
  if (n_alpha < 0 || n_alpha > n_orb || n_beta < 0 || n_beta > n_orb)
    fail(ErrorCode::DimensionMismatch, "electron counts outside [0, n_orb]");
  const long double dim = static_cast<long double>(binomial(n_orb, n_alpha)) * binomial(n_orb, n_beta);
  if (dim > static_cast<long double>(cap))
    fail(ErrorCode::Overflow, "determinant space of " + std::to_string(static_cast<double>(dim)) + " exceeds cap");
  DeterminantBasis b;
  b.n_orb = n_orb;
  b.n_alpha = n_alpha;
  b.n_beta = n_beta;
  b.alpha_strings = strings(n_orb, n_alpha);
  b.beta_strings = strings(n_orb, n_beta);
  return b;
}

Matrix build_hamiltonian(const FciProblem& p, const DeterminantBasis& basis) {
  check_problem(p, basis);
  return dense(make_tables(basis), make_operators(p), p.e_const);
}

Vector apply_hamiltonian(const FciProblem& p, const DeterminantBasis& basis, const Vector& c) {
  check_problem(p, basis);
  if (c.size() != static_cast<Eigen::Index>(basis.size()))
    fail(ErrorCode::DimensionMismatch, "CI vector length differs from basis size");
  return sigma(make_tables(basis), make_operators(p), p.e_const, c);
}

Vector hamiltonian_diagonal(const FciProblem& p, const DeterminantBasis& basis) {
  check_problem(p, basis);
  return diagonal(make_tables(basis), make_operators(p), p.e_const);
}

ClusterSolution ground_state(const FciProblem& p, const DeterminantBasis& basis, const FciOptions& opts) {
  check_problem(p, basis);
  if (basis.size() == 0) fail(ErrorCode::DimensionMismatch, "empty determinant basis");
  const Tables t = make_tables(basis);
  const Operators op = make_operators(p);
  ClusterSolution sol;
  sol.n_alpha = basis.n_alpha;
  sol.n_beta = basis.n_beta;
  sol.gap = std::numeric_limits<double>::infinity();
  if (basis.size() < opts.dense_cutoff) {
    const Matrix h = dense(t, op, p.e_const);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) fail(ErrorCode::NoConvergence, "dense FCI eigensolver failed");
    sol.energy = es.eigenvalues()(0);
    sol.ci = es.eigenvectors().col(0);
    if (h.rows() > 1) sol.gap = es.eigenvalues()(1) - es.eigenvalues()(0);
  } else {
    const int roots = std::max(1, opts.n_roots);
    const Davidson d = davidson(t, op, p.e_const, roots, opts.residual_tol, opts.max_iter);
    sol.energy = d.values(0);
    sol.ci = d.vectors.col(0);
    sol.ci.normalize();
    if (d.values.size() > 1) sol.gap = d.values(1) - d.values(0);
    sol.iterations = d.iterations;
  }
  // Fix the overall phase so the CI vector is reproducible.
  Eigen::Index imax = 0;
  sol.ci.cwiseAbs().maxCoeff(&imax);
  if (sol.ci(imax) < 0) sol.ci = -sol.ci;
  sol.degenerate = sol.gap < 1e-9;
  make_rdms(sol.ci, basis, sol.rdm1, opts.want_rdm2 ? &sol.rdm2 : nullptr);
  return sol;
}

ClusterSolution ground_state(const FciProblem& p, const FciOptions& opts) {
  const DeterminantBasis basis = enumerate(static_cast<int>(p.h.rows()), p.n_alpha, p.n_beta, opts.dim_cap);
  return ground_state(p, basis, opts);
}

ShiftedSolver::ShiftedSolver(FciProblem p, int n_shift, FciOptions opts)
    : p_(std::move(p)), n_shift_(n_shift), opts_(opts) {
  basis_ = enumerate(static_cast<int>(p_.h.rows()), p_.n_alpha, p_.n_beta, opts_.dim_cap);
  check_problem(p_, basis_);
  const std::uint64_t mask = n_shift_ >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_shift_) - 1;
  const std::size_t nb = basis_.beta_strings.size();
  count_.resize(static_cast<Eigen::Index>(basis_.size()));
  for (std::size_t ia = 0; ia < basis_.alpha_strings.size(); ++ia)
    for (std::size_t ib = 0; ib < nb; ++ib)
      count_(static_cast<Eigen::Index>(ia * nb + ib)) =
          std::popcount(basis_.alpha_strings[ia] & mask) + std::popcount(basis_.beta_strings[ib] & mask);
  dense_ = basis_.size() < opts_.dense_cutoff;
  if (dense_) h0_ = dense(make_tables(basis_), make_operators(p_), p_.e_const);
}

Vector ShiftedSolver::lowest(double mu, double& e0, double& gap, int& iters) const {
  gap = std::numeric_limits<double>::infinity();
  iters = 0;
  Vector ci;
  if (dense_) {
    Matrix h = h0_;
    h.diagonal() -= mu * count_;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) fail(ErrorCode::NoConvergence, "dense FCI eigensolver failed");
    e0 = es.eigenvalues()(0);
    if (h.rows() > 1) gap = es.eigenvalues()(1) - e0;
    ci = es.eigenvectors().col(0);
  } else {
    FciProblem q = p_;
    for (int f = 0; f < n_shift_; ++f) q.h(f, f) -= mu;
    const Davidson d = davidson(make_tables(basis_), make_operators(q), q.e_const, std::max(1, opts_.n_roots),
                                opts_.residual_tol, opts_.max_iter);
    e0 = d.values(0);
    if (d.values.size() > 1) gap = d.values(1) - e0;
    ci = d.vectors.col(0);
    ci.normalize();
    iters = d.iterations;
  }
  Eigen::Index imax = 0;
  ci.cwiseAbs().maxCoeff(&imax);
  if (ci(imax) < 0) ci = -ci;
  return ci;
}

double ShiftedSolver::occupation(double mu) const {
  double e0, gap;
  int iters;
  const Vector ci = lowest(mu, e0, gap, iters);
  return ci.cwiseAbs2().dot(count_);
}

ClusterSolution ShiftedSolver::solve(double mu, bool want_rdm2) const {
  ClusterSolution sol;
  sol.n_alpha = basis_.n_alpha;
  sol.n_beta = basis_.n_beta;
  sol.ci = lowest(mu, sol.energy, sol.gap, sol.iterations);
  sol.degenerate = sol.gap < 1e-9;
  make_rdms(sol.ci, basis_, sol.rdm1, want_rdm2 ? &sol.rdm2 : nullptr);
  return sol;
}

void make_rdms(const Vector& ci, const DeterminantBasis& basis, Matrix& rdm1, Tensor4* rdm2) {
  if (ci.size() != static_cast<Eigen::Index>(basis.size()))
    fail(ErrorCode::DimensionMismatch, "CI vector length differs from basis size");
  const Tables t = make_tables(basis);
  const int n = basis.n_orb;
  const Matrix d = excitation_vectors(t, ci);
  const Vector flat = d.transpose() * ci;
  rdm1.resize(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) rdm1(p, q) = flat(p * n + q);
  rdm1 = 0.5 * (rdm1 + rdm1.transpose());
  if (!rdm2) return;
  const Matrix m = d.transpose() * d;
  *rdm2 = Tensor4(n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s)
          (*rdm2)(p, q, r, s) = m(q * n + p, r * n + s) - (q == r ? rdm1(p, s) : 0.0);
}

double energy_from_rdms(const Matrix& h, const TwoBody& g, double e_const, const Matrix& rdm1, const Tensor4& rdm2) {
  double e = e_const + (h.array() * rdm1.array()).sum();
  if (const auto* os = std::get_if<OnSiteInteraction>(&g)) {
    for (int s = 0; s < os->u.size(); ++s) e += 0.5 * os->u(s) * rdm2(s, s, s, s);
    return e;
  }
  const auto& t = std::get<Tensor4>(g);
  const auto& a = t.data();
  const auto& b = rdm2.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return e + 0.5 * acc;
}

}  // namespace hhemb
