#include "hhemb/lattice.hpp"

#include <string>

#include "hhemb/error.hpp"

namespace hhemb {

const char* boundary_name(Boundary b) {
  switch (b) {
    case Boundary::Open: return "open";
    case Boundary::Periodic: return "periodic";
    case Boundary::Antiperiodic: return "antiperiodic";
  }
  return "?";
}

Boundary parse_boundary(const std::string& s) {
  if (s == "open") return Boundary::Open;
  if (s == "periodic") return Boundary::Periodic;
  if (s == "antiperiodic") return Boundary::Antiperiodic;
  fail(ErrorCode::ParseError, "unknown boundary '" + s + "'");
}

void validate_lattice(const LatticeSpec& spec) {
  if (spec.n_sites < 2) fail(ErrorCode::DimensionMismatch, "lattice needs at least 2 sites");
  if (!(spec.t > 0.0)) fail(ErrorCode::DimensionMismatch, "hopping t must be positive");
  if (!(spec.u >= 0.0)) fail(ErrorCode::DimensionMismatch, "U must be non-negative");
  if (spec.v_ext.size() != 0 && spec.v_ext.size() != spec.n_sites)
    fail(ErrorCode::BadPotentialLength, "v_ext has " + std::to_string(spec.v_ext.size()) + " entries");
}

Vector external_potential(const LatticeSpec& spec) {
  return spec.v_ext.size() == 0 ? Vector::Zero(spec.n_sites) : spec.v_ext;
}

bool is_uniform(const LatticeSpec& spec) {
  if (spec.boundary == Boundary::Open) return false;
  const Vector v = external_potential(spec);
  return (v.array() == v(0)).all();
}

Matrix build_h1(const LatticeSpec& spec, const Vector& v_hxc) {
  validate_lattice(spec);
  const int L = spec.n_sites;
  if (v_hxc.size() != 1 && v_hxc.size() != L)
    fail(ErrorCode::BadPotentialLength, "v_hxc has " + std::to_string(v_hxc.size()) + " entries");
  Matrix h = Matrix::Zero(L, L);
  for (int s = 0; s + 1 < L; ++s) h(s, s + 1) = h(s + 1, s) = -spec.t;
  if (L > 2 && spec.boundary != Boundary::Open) {
    const double wrap = spec.boundary == Boundary::Periodic ? -spec.t : spec.t;
    h(0, L - 1) = h(L - 1, 0) = wrap;
  }
  const Vector v = external_potential(spec);
  for (int s = 0; s < L; ++s) h(s, s) = v(s) + (v_hxc.size() == 1 ? v_hxc(0) : v_hxc(s));
  return h;
}

Matrix build_h1(const LatticeSpec& spec, double v_hxc) { return build_h1(spec, Vector::Constant(1, v_hxc)); }

DensityMatrix meanfield_rdm(const Matrix& h, int n_per_spin) {
  const int L = static_cast<int>(h.rows());
  if (n_per_spin < 0 || n_per_spin > L)
    fail(ErrorCode::DimensionMismatch, "filling " + std::to_string(n_per_spin) + " outside [0, L]");
  const SymEig e = sym_eig(h);
  if (n_per_spin > 0 && n_per_spin < L && e.values(n_per_spin) - e.values(n_per_spin - 1) < kFermiGapTol)
    fail(ErrorCode::FermiDegeneracy, "degenerate Fermi level at filling " + std::to_string(n_per_spin));
  const Matrix c = e.vectors.leftCols(n_per_spin);
  DensityMatrix dm;
  dm.gamma = c * c.transpose();
  dm.n_elec_per_spin = n_per_spin;
  dm.idempotent = idempotency_error(dm.gamma) <= 1e-10;
  return dm;
}

Filling filling_from_mu(const Matrix& h, double mu) {
  const SymEig e = sym_eig(h);
  int n = 0;
  for (int i = 0; i < e.values.size(); ++i)
    if (e.values(i) <= mu) ++n;
  return {n, 2.0 * n / static_cast<double>(h.rows())};
}

std::vector<int> closed_shell_fillings(const Matrix& h) {
  const SymEig e = sym_eig(h);
  const int L = static_cast<int>(h.rows());
  std::vector<int> out{0};
  for (int m = 1; m < L; ++m)
    if (e.values(m) - e.values(m - 1) >= kFermiGapTol) out.push_back(m);
  out.push_back(L);
  return out;
}

}  // namespace hhemb
