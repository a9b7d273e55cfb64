#pragma once

#include <string>
#include <vector>

#include "hhemb/householder.hpp"
#include "hhemb/linalg.hpp"

namespace hhemb {

enum class Boundary { Open, Periodic, Antiperiodic };

const char* boundary_name(Boundary b);
Boundary parse_boundary(const std::string& s);

struct LatticeSpec {
  int n_sites = 2;
  double t = 1.0;
  double u = 0.0;
  Vector v_ext;  // empty means zero
  Boundary boundary = Boundary::Periodic;
};

void validate_lattice(const LatticeSpec& spec);
Vector external_potential(const LatticeSpec& spec);
bool is_uniform(const LatticeSpec& spec);

// h[s][s+-1] = -t (the wrap bond carries +t for antiperiodic rings); h[s][s] = v_ext + v_hxc.
Matrix build_h1(const LatticeSpec& spec, const Vector& v_hxc);
Matrix build_h1(const LatticeSpec& spec, double v_hxc = 0.0);

constexpr double kFermiGapTol = 1e-10;

DensityMatrix meanfield_rdm(const Matrix& h, int n_per_spin);

struct Filling {
  int n_per_spin = 0;
  double density = 0.0;  // both spins
};

Filling filling_from_mu(const Matrix& h, double mu);

// Per-spin fillings m with a nonzero HOMO-LUMO gap, including 0 and L.
std::vector<int> closed_shell_fillings(const Matrix& h);

}  // namespace hhemb
