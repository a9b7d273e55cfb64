#include "hhemb/abinitio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "hhemb/error.hpp"

namespace hhemb {

namespace {

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

bool parse_real(std::string tok, double& out) {
  for (char& c : tok)
    if (c == 'D' || c == 'd') c = 'E';
  char* end = nullptr;
  out = std::strtod(tok.c_str(), &end);
  return end && *end == '\0' && !tok.empty();
}

bool parse_int(const std::string& tok, long& out) {
  char* end = nullptr;
  out = std::strtol(tok.c_str(), &end, 10);
  return end && *end == '\0' && !tok.empty();
}

[[noreturn]] void parse_error(int line, const std::string& msg) {
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + msg);
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

IntegralSet parse_fcidump(std::istream& in) {
  std::string header;
  std::string line;
  int lineno = 0;
  bool started = false, ended = false;
  while (!ended && std::getline(in, line)) {
    ++lineno;
    const std::string u = upper(line);
    if (!started) {
      if (u.find("&FCI") == std::string::npos) {
        if (u.find_first_not_of(" \t\r") == std::string::npos) continue;
        parse_error(lineno, "expected &FCI header");
      }
      started = true;
    }
    std::string chunk = u;
    const auto end_pos = std::min(chunk.find("&END"), chunk.find('/'));
    if (end_pos != std::string::npos) {
      chunk = chunk.substr(0, end_pos);
      ended = true;
    }
    header += " " + chunk;
  }
  if (!ended) parse_error(lineno, "header not terminated by &END or /");

  for (char& c : header)
    if (c == ',') c = ' ';
  const auto pos = header.find("&FCI");
  header.replace(pos, 4, " ");
  // Normalize "KEY = VAL" to "KEY=VAL".
  std::string h2;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == '=') {
      while (!h2.empty() && h2.back() == ' ') h2.pop_back();
      h2 += '=';
      while (i + 1 < header.size() && header[i + 1] == ' ') ++i;
    } else {
      h2 += header[i];
    }
  }
  long norb = -1, nelec = -1, ms2 = 0;
  std::istringstream hs(h2);
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;  // continuation of a list such as ORBSYM
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    long v = 0;
    if (key == "NORB" || key == "NELEC" || key == "MS2") {
      if (!parse_int(val, v)) parse_error(lineno, "bad integer for " + key);
      (key == "NORB" ? norb : key == "NELEC" ? nelec : ms2) = v;
    }
  }
  if (norb < 0 || nelec < 0) fail(ErrorCode::InconsistentHeader, "NORB and NELEC are required");

  IntegralSet ints;
  ints.n_orb = static_cast<int>(norb);
  ints.n_elec = static_cast<int>(nelec);
  ints.ms2 = static_cast<int>(ms2);
  ints.h1 = Matrix::Zero(norb, norb);
  ints.g2 = Tensor4(ints.n_orb);
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> toks;
    while (ls >> tok) toks.push_back(tok);
    if (toks.empty()) continue;
    if (toks.size() != 5) parse_error(lineno, "expected 'value i j k l'");
    double val = 0;
    if (!parse_real(toks[0], val)) parse_error(lineno, "bad value '" + toks[0] + "'");
    long idx[4];
    for (int k = 0; k < 4; ++k) {
      if (!parse_int(toks[k + 1], idx[k])) parse_error(lineno, "bad index '" + toks[k + 1] + "'");
      if (idx[k] < 0 || idx[k] > norb)
        fail(ErrorCode::InconsistentHeader, "line " + std::to_string(lineno) + ": index exceeds NORB");
    }
    const int i = static_cast<int>(idx[0]) - 1, j = static_cast<int>(idx[1]) - 1;
    const int k = static_cast<int>(idx[2]) - 1, l = static_cast<int>(idx[3]) - 1;
    if (i < 0 && j < 0 && k < 0 && l < 0) {
      ints.e_core = val;
    } else if (k < 0 && l < 0) {
      if (i < 0) parse_error(lineno, "malformed one-body indices");
      if (j < 0) continue;  // orbital energy record
      ints.h1(i, j) = ints.h1(j, i) = val;
    } else {
      if (i < 0 || j < 0 || k < 0 || l < 0) parse_error(lineno, "malformed two-body indices");
      ints.g2.set_sym(i, j, k, l, val);
    }
  }
  return ints;
}

IntegralSet read_fcidump(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::ParseError, "cannot open " + path);
  return parse_fcidump(f);
}

void write_fcidump(std::ostream& out, const IntegralSet& ints, double threshold) {
  const int n = ints.n_orb;
  out << "&FCI NORB=" << n << ",NELEC=" << ints.n_elec << ",MS2=" << ints.ms2 << ",\n";
  out << " ORBSYM=";
  for (int i = 0; i < n; ++i) out << "1,";
  out << "\n ISYM=1,\n &END\n";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l <= k; ++l) {
          if (i * (i + 1) / 2 + j < k * (k + 1) / 2 + l) continue;
          const double v = ints.g2(i, j, k, l);
          if (std::abs(v) > threshold || (threshold == 0.0 && v != 0.0))
            out << fmt17(v) << ' ' << i + 1 << ' ' << j + 1 << ' ' << k + 1 << ' ' << l + 1 << '\n';
        }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = ints.h1(i, j);
      if (std::abs(v) > threshold || (threshold == 0.0 && v != 0.0))
        out << fmt17(v) << ' ' << i + 1 << ' ' << j + 1 << " 0 0\n";
    }
  out << fmt17(ints.e_core) << " 0 0 0 0\n";
}

Matrix parse_overlap(std::istream& in) {
  long n = 0;
  if (!(in >> n) || n < 0) fail(ErrorCode::ParseError, "overlap: missing dimension line");
  Matrix s(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      std::string tok;
      double v = 0;
      if (!(in >> tok) || !parse_real(tok, v))
        fail(ErrorCode::ParseError, "overlap: bad or missing entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
      s(i, j) = v;
    }
  return s;
}

Matrix read_overlap(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::ParseError, "cannot open " + path);
  return parse_overlap(f);
}

Matrix lowdin(const Matrix& s) { return spd_inv_sqrt(s); }

IntegralSet transform_integrals(const Matrix& c, const IntegralSet& ints) {
  if (c.rows() != ints.n_orb) fail(ErrorCode::DimensionMismatch, "transform_integrals: coefficient rows");
  IntegralSet out = ints;
  out.n_orb = static_cast<int>(c.cols());
  out.h1 = c.transpose() * ints.h1 * c;
  out.h1 = 0.5 * (out.h1 + out.h1.transpose());
  out.g2 = transform_tensor(ints.g2, c);
  return out;
}

IntegralSet to_oao(const IntegralSet& ao, const Matrix& s) {
  if (s.rows() != ao.n_orb || s.cols() != ao.n_orb) fail(ErrorCode::DimensionMismatch, "overlap size");
  return transform_integrals(lowdin(s), ao);
}

IntegralSet lattice_integrals(const LatticeSpec& spec, int n_elec) {
  IntegralSet ints;
  ints.n_orb = spec.n_sites;
  ints.n_elec = n_elec;
  ints.h1 = build_h1(spec);
  ints.g2 = Tensor4(spec.n_sites);
  for (int s = 0; s < spec.n_sites; ++s) ints.g2(s, s, s, s) = spec.u;
  return ints;
}

Matrix fock_matrix(const IntegralSet& ints, const Matrix& gamma) {
  return ints.h1 + coulomb_exchange(TwoBody{ints.g2}, 2.0 * gamma);
}

double rhf_energy(const IntegralSet& ints, const Matrix& gamma) {
  const Matrix f = fock_matrix(ints, gamma);
  return ints.e_core + (gamma.array() * (ints.h1 + f).array()).sum();
}

ScfResult rhf(const IntegralSet& ints, const ScfOptions& opts) {
  if (ints.n_elec % 2 != 0) fail(ErrorCode::DimensionMismatch, "RHF needs an even electron count");
  const int n = ints.n_orb;
  const int nocc = ints.n_elec / 2;
  if (nocc > n) fail(ErrorCode::DimensionMismatch, "more electron pairs than orbitals");

  auto aufbau = [&](const Matrix& f, SymEig& e) {
    e = sym_eig(0.5 * (f + f.transpose()));
    if (nocc > 0 && nocc < n && e.values(nocc) - e.values(nocc - 1) < kFermiGapTol)
      fail(ErrorCode::FermiDegeneracy, "RHF HOMO-LUMO gap vanishes");
    const Matrix c = e.vectors.leftCols(nocc);
    return Matrix(c * c.transpose());
  };

  ScfResult res;
  SymEig e;
  Matrix gamma = aufbau(ints.h1, e);
  for (int it = 1; it <= opts.max_iter; ++it) {
    const Matrix f = fock_matrix(ints, gamma);
    res.energy_history.push_back(ints.e_core + (gamma.array() * (ints.h1 + f).array()).sum());
    const Matrix g_new = aufbau(f, e);
    const Matrix fn = fock_matrix(ints, g_new);
    const double comm = max_abs(fn * g_new - g_new * fn);
    if (comm < opts.tol) {
      res.iterations = it;
      res.commutator = comm;
      res.fock = fn;
      SymEig ef = sym_eig(fn);
      res.orbital_energies = ef.values;
      res.mo_coeffs = ef.vectors;
      res.gamma = make_density(g_new, nocc);
      res.gamma.idempotent = idempotency_error(g_new) <= 1e-8;
      res.e_total = rhf_energy(ints, g_new);
      return res;
    }
    gamma = opts.damping * gamma + (1.0 - opts.damping) * g_new;
  }
  fail(ErrorCode::ScfNoConvergence, "RHF not converged in " + std::to_string(opts.max_iter) + " iterations");
}

}  // namespace hhemb
