#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hhemb/householder.hpp"
#include "hhemb/lattice.hpp"
#include "hhemb/linalg.hpp"
#include "hhemb/tensor.hpp"

namespace hhemb {

struct IntegralSet {
  int n_orb = 0;
  int n_elec = 0;
  int ms2 = 0;
  double e_core = 0.0;
  Matrix h1;
  Tensor4 g2;
};

// ORBSYM and ISYM are read and discarded.
IntegralSet parse_fcidump(std::istream& in);
IntegralSet read_fcidump(const std::string& path);
void write_fcidump(std::ostream& out, const IntegralSet& ints, double threshold = 0.0);

// Dimension line, then n*n row-major values.
Matrix parse_overlap(std::istream& in);
Matrix read_overlap(const std::string& path);

Matrix lowdin(const Matrix& s);
IntegralSet transform_integrals(const Matrix& c, const IntegralSet& ints);
IntegralSet to_oao(const IntegralSet& ao, const Matrix& s);

IntegralSet lattice_integrals(const LatticeSpec& spec, int n_elec);

struct ScfOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double damping = 0.5;  // weight of the previous density
};

struct ScfResult {
  double e_total = 0.0;
  Vector orbital_energies;
  Matrix mo_coeffs;
  DensityMatrix gamma;
  Matrix fock;
  int iterations = 0;
  double commutator = 0.0;
  std::vector<double> energy_history;
};

Matrix fock_matrix(const IntegralSet& ints, const Matrix& gamma);
double rhf_energy(const IntegralSet& ints, const Matrix& gamma);
ScfResult rhf(const IntegralSet& ints, const ScfOptions& opts = {});

}  // namespace hhemb
