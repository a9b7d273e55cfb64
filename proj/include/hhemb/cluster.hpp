#pragma once

#include <optional>
#include <string>

#include "hhemb/abinitio.hpp"
#include "hhemb/fci.hpp"
#include "hhemb/householder.hpp"
#include "hhemb/lattice.hpp"
#include "hhemb/tensor.hpp"

namespace hhemb {

enum class BathMode { NIB, IB };

const char* bath_name(BathMode m);
BathMode parse_bath(const std::string& s);

struct ClusterHamiltonian {
  int n_cluster = 0;
  int n_frag = 0;
  int n_elec_cluster = 0;
  Matrix h_eff;   // core-dressed, without the mu_frag term
  Matrix h_bare;  // bare one-body operator in the cluster basis
  TwoBody g_eff;
  double mu_frag = 0.0;
  double e_core_env = 0.0;
  BathMode mode = BathMode::IB;
  Matrix coeffs;  // cluster orbitals in the original basis
};

struct OneBodyProjection {
  Matrix h_eff;
  double e_core_env = 0.0;
};

// gamma_env is the per-spin environment density in the original basis.
OneBodyProjection project_one_body(const Matrix& h_full, const Matrix& coeffs, const Matrix& gamma_env,
                                   const TwoBody* g_full = nullptr);

struct ClusterOptions {
  // Dress lattice clusters with the environment mean-field potential of the active interaction.
  bool core_potential = true;
};

// h_full: one-body operator the mean-field density came from; h_bare: physical one-body operator.
ClusterHamiltonian build_cluster_hamiltonian(BathMode mode, const Matrix& h_full, const Matrix& h_bare,
                                             const TwoBody& g_full, const HouseholderResult& hh, double mu_frag,
                                             bool core_potential);

ClusterHamiltonian build_lattice_cluster(BathMode mode, const LatticeSpec& spec, const Matrix& h_full,
                                         const HouseholderResult& hh, double mu_frag,
                                         const ClusterOptions& opts = {});

ClusterHamiltonian build_molecular_cluster(BathMode mode, const IntegralSet& ints, const HouseholderResult& hh,
                                           double mu_frag);

// h = h_eff - mu_frag on the fragment diagonal.
FciProblem to_fci_problem(const ClusterHamiltonian& ch);

// Per-spin mean-field cluster density, the cluster block of gamma-tilde.
Matrix cluster_meanfield_density(const HouseholderResult& hh);

}  // namespace hhemb
