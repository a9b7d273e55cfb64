#pragma once

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "hhemb/abinitio.hpp"
#include "hhemb/cluster.hpp"
#include "hhemb/fci.hpp"
#include "hhemb/householder.hpp"
#include "hhemb/lattice.hpp"

namespace hhemb {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct HtDmfetConfig {
  BathMode mode = BathMode::IB;
  int frag_size = 1;
  int frag_start = 0;
  double target_density = kUnset;  // default: mean-field filling 2m/L
  double bracket_lo = kUnset;      // default: -2U - 4t
  double bracket_hi = kUnset;      // default: 2U + 4t
  double tol_occ = 1e-8;
  int max_root_iters = 100;
  bool pivot = false;
  bool core_potential = true;
};

struct LpfetConfig {
  int frag_size = 1;
  int frag_start = 0;
  double mu_lattice = 0.0;
  double tol_density = 1e-8;
  int max_iters = 200;
  double mixing = 1.0;
  bool pivot = false;
};

struct EmbeddingReport {
  bool converged = false;
  int iterations = 0;
  double mu_tilde = 0.0;
  double v_hxc = 0.0;
  double density = 0.0;         // lattice density, both spins
  double cluster_density = 0.0; // fragment-averaged cluster density, both spins
  double residual = 0.0;
  double per_site_energy = 0.0;
  int n_per_spin = 0;
  ClusterSolution cluster_solution;
  std::vector<std::pair<double, double>> trace;  // (mu_tilde or v_hxc, fragment density) evaluations
  std::string message;
};

FragmentPartition ring_fragment(int n_sites, int start, int size);

EmbeddingReport htdmfet_lattice(const LatticeSpec& spec, const HtDmfetConfig& cfg, int n_per_spin);

// LPFET at a fixed Kohn-Sham filling: v_hxc such that the cluster fragment density equals 2m/L.
EmbeddingReport lpfet_at_filling(const LatticeSpec& spec, const LpfetConfig& cfg, int n_per_spin);
// LPFET driven by the lattice chemical potential cfg.mu_lattice.
EmbeddingReport lpfet(const LatticeSpec& spec, const LpfetConfig& cfg);

double per_site_energy(const ClusterSolution& sol, const ClusterHamiltonian& ch, double u);

struct MolecularConfig {
  BathMode mode = BathMode::IB;
  std::vector<std::vector<int>> fragments;  // must tile all orbitals
  double tol_occ = 1e-8;
  int max_root_iters = 100;
  double bracket = 2.0;  // hartree, symmetric around zero
  bool pivot = true;     // OAO densities have symmetry zeros in the natural gamma1 rows
};

struct MolecularReport {
  bool converged = false;
  double e_hf = 0.0;
  double e_embedding = 0.0;
  double mu_tilde = 0.0;
  double electron_count = 0.0;
  int iterations = 0;
  ScfResult scf;
  std::vector<ClusterHamiltonian> clusters;
  std::vector<ClusterSolution> solutions;
};

void check_tiling(const std::vector<std::vector<int>>& fragments, int n_orb);

double democratic_energy(const std::vector<ClusterHamiltonian>& clusters, const std::vector<ClusterSolution>& sols,
                         const std::vector<std::vector<int>>& fragments, int n_orb, double e_nuc);

MolecularReport htdmfet_molecule(const IntegralSet& oao_ints, const MolecularConfig& cfg);

// Root search on a nondecreasing function: f(x) = target, from x0 outward within [lo, hi].
struct RootResult {
  bool converged = false;
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
};

RootResult find_level(const std::function<double(double)>& f, double target, double x0, double lo, double hi,
                      double tol, int max_iter, std::vector<std::pair<double, double>>* trace = nullptr);

enum class Scheme { HtDmfet, Lpfet };
const char* scheme_name(Scheme s);
Scheme parse_scheme(const std::string& s);

struct ScanConfig {
  Scheme scheme = Scheme::HtDmfet;
  HtDmfetConfig ht;
  LpfetConfig lp;
  int jobs = 1;
};

// Embedded per-site energy at one filling (per spin), either scheme.
struct FillingPoint {
  int n_per_spin = 0;
  double density = 0.0;
  double energy = 0.0;
  double param = 0.0;  // mu_tilde or v_hxc
  bool converged = false;
  std::string error;
};

FillingPoint energy_at_filling(const LatticeSpec& spec, const ScanConfig& cfg, int n_per_spin);
std::vector<FillingPoint> energy_curve(const LatticeSpec& spec, const ScanConfig& cfg, const std::vector<int>& fillings);

struct ScanRow {
  double mu = 0.0;
  double n = 0.0;
  double e = 0.0;
  int n_per_spin = 0;
  bool converged = false;
  std::string error;
};

// Maps a closed-shell energy curve onto a mu grid; HtDmfet takes the Legendre
// minimizer of e(n) - mu n, Lpfet picks the filling whose KS window contains mu.
std::vector<ScanRow> scan_from_curve(const LatticeSpec& spec, Scheme scheme, const std::vector<FillingPoint>& curve,
                                     const std::vector<double>& mu_grid);
std::vector<ScanRow> mu_scan(const LatticeSpec& spec, const ScanConfig& cfg, const std::vector<double>& mu_grid);

// Runs fn(i) for i in [0, n) on `jobs` worker threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace hhemb
