#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hhemb/linalg.hpp"
#include "hhemb/tensor.hpp"

namespace hhemb {

struct DeterminantBasis {
  int n_orb = 0;
  int n_alpha = 0;
  int n_beta = 0;
  std::vector<std::uint64_t> alpha_strings;
  std::vector<std::uint64_t> beta_strings;
  std::size_t size() const { return alpha_strings.size() * beta_strings.size(); }
  // Determinant (ia, ib) sits at ia * n_beta_strings + ib.
  std::size_t index(std::size_t ia, std::size_t ib) const { return ia * beta_strings.size() + ib; }
};

constexpr std::size_t kDefaultDimCap = 2000000;

DeterminantBasis enumerate(int n_orb, int n_alpha, int n_beta, std::size_t cap = kDefaultDimCap);

// Spin-free Hamiltonian sum h_pq E_pq + 1/2 sum (pq|rs)(E_pq E_rs - d_qr E_ps) + e_const.
struct FciProblem {
  Matrix h;
  TwoBody g;
  double e_const = 0.0;
  int n_alpha = 0;
  int n_beta = 0;
};

struct FciOptions {
  std::size_t dense_cutoff = 4000;
  double residual_tol = 1e-9;
  int max_iter = 500;
  int n_roots = 2;
  bool want_rdm2 = true;
  std::size_t dim_cap = kDefaultDimCap;
};

struct ClusterSolution {
  double energy = 0.0;
  Vector ci;
  Matrix rdm1;  // spin-summed
  Tensor4 rdm2; // spin-summed, chemist order
  double gap = 0.0;          // E1 - E0, infinity when only one state
  bool degenerate = false;   // gap < 1e-9
  int iterations = 0;        // Davidson iterations, 0 on the dense path
  int n_alpha = 0;
  int n_beta = 0;
};

Matrix build_hamiltonian(const FciProblem& p, const DeterminantBasis& basis);
Vector apply_hamiltonian(const FciProblem& p, const DeterminantBasis& basis, const Vector& c);
Vector hamiltonian_diagonal(const FciProblem& p, const DeterminantBasis& basis);

ClusterSolution ground_state(const FciProblem& p, const DeterminantBasis& basis, const FciOptions& opts = {});
ClusterSolution ground_state(const FciProblem& p, const FciOptions& opts = {});

// Ground states of H0 - mu * sum_{p < n_shift} n_p for varying mu. The shifted
// number operator is diagonal in the determinant basis, so H0 is built once.
class ShiftedSolver {
 public:
  ShiftedSolver(FciProblem p, int n_shift, FciOptions opts = {});
  ClusterSolution solve(double mu, bool want_rdm2) const;
  // Shifted-orbital occupation only (both spins), no RDMs.
  double occupation(double mu) const;
  std::size_t dim() const { return basis_.size(); }

 private:
  Vector lowest(double mu, double& e0, double& gap, int& iters) const;

  FciProblem p_;
  int n_shift_;
  FciOptions opts_;
  DeterminantBasis basis_;
  Vector count_;  // shifted-orbital electron count per determinant
  Matrix h0_;     // dense H at mu = 0, when below the cutoff
  bool dense_ = false;
};

void make_rdms(const Vector& ci, const DeterminantBasis& basis, Matrix& rdm1, Tensor4* rdm2);

double energy_from_rdms(const Matrix& h, const TwoBody& g, double e_const, const Matrix& rdm1, const Tensor4& rdm2);

}  // namespace hhemb
