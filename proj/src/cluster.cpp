#include "hhemb/cluster.hpp"

#include <cmath>

#include "hhemb/error.hpp"

namespace hhemb {

const char* bath_name(BathMode m) { return m == BathMode::NIB ? "NIB" : "IB"; }

BathMode parse_bath(const std::string& s) {
  if (s == "NIB" || s == "nib") return BathMode::NIB;
  if (s == "IB" || s == "ib") return BathMode::IB;
  fail(ErrorCode::ParseError, "unknown bath mode '" + s + "'");
}

OneBodyProjection project_one_body(const Matrix& h_full, const Matrix& coeffs, const Matrix& gamma_env,
                                   const TwoBody* g_full) {
  const Eigen::Index L = h_full.rows();
  if (h_full.cols() != L || coeffs.rows() != L || gamma_env.rows() != L || gamma_env.cols() != L)
    fail(ErrorCode::DimensionMismatch, "project_one_body: operand sizes disagree");
  OneBodyProjection out;
  const Matrix d_env = 2.0 * gamma_env;
  Matrix f = h_full;
  out.e_core_env = (h_full.array() * d_env.array()).sum();
  if (g_full) {
    if (two_body_dim(*g_full) != L) fail(ErrorCode::DimensionMismatch, "project_one_body: two-body size");
    const Matrix g_env = coulomb_exchange(*g_full, d_env);
    f += g_env;
    out.e_core_env += 0.5 * (g_env.array() * d_env.array()).sum();
  }
  out.h_eff = coeffs.transpose() * f * coeffs;
  out.h_eff = 0.5 * (out.h_eff + out.h_eff.transpose());
  return out;
}

Matrix cluster_meanfield_density(const HouseholderResult& hh) {
  const int nc = cluster_size(hh);
  return hh.gamma_tilde.topLeftCorner(nc, nc);
}

ClusterHamiltonian build_cluster_hamiltonian(BathMode mode, const Matrix& h_full, const Matrix& h_bare,
                                             const TwoBody& g_full, const HouseholderResult& hh, double mu_frag,
                                             bool core_potential) {
  if (!hh.idempotent_source)
    fail(ErrorCode::NonIdempotentSource, "cluster Hamiltonians need an idempotent mean-field density");
  const int L = static_cast<int>(hh.r.rows());
  if (h_full.rows() != L || h_bare.rows() != L || two_body_dim(g_full) != L)
    fail(ErrorCode::DimensionMismatch, "cluster Hamiltonian operands disagree with the transformation");
  const int N = hh.n_frag;

  ClusterHamiltonian ch;
  ch.mode = mode;
  ch.n_frag = N;
  ch.n_cluster = cluster_size(hh);
  ch.mu_frag = mu_frag;
  ch.coeffs = cluster_coeffs(hh);
  const double trace = cluster_meanfield_density(hh).trace();
  ch.n_elec_cluster = 2 * static_cast<int>(std::lround(trace));

  // Fragment orbital f of the cluster is original orbital hh.order[f].
  TwoBody g_active = g_full;
  if (mode == BathMode::NIB) {
    if (const auto* os = std::get_if<OnSiteInteraction>(&g_full)) {
      Vector u = Vector::Zero(L);
      for (int f = 0; f < N; ++f) u(hh.order[f]) = os->u(hh.order[f]);
      g_active = OnSiteInteraction{u};
    } else {
      const auto& t = std::get<Tensor4>(g_full);
      Tensor4 keep(L);
      for (int p = 0; p < N; ++p)
        for (int q = 0; q < N; ++q)
          for (int r = 0; r < N; ++r)
            for (int s = 0; s < N; ++s) {
              const int a = hh.order[p], b = hh.order[q], c = hh.order[r], d = hh.order[s];
              keep(a, b, c, d) = t(a, b, c, d);
            }
      g_active = std::move(keep);
    }
  }

  const Matrix gamma_env = environment_density(hh);
  const OneBodyProjection proj = project_one_body(h_full, ch.coeffs, gamma_env, core_potential ? &g_active : nullptr);
  ch.h_eff = proj.h_eff;
  ch.e_core_env = proj.e_core_env;
  ch.h_bare = ch.coeffs.transpose() * h_bare * ch.coeffs;
  ch.h_bare = 0.5 * (ch.h_bare + ch.h_bare.transpose());

  if (const auto* os = std::get_if<OnSiteInteraction>(&g_active); os && mode == BathMode::NIB) {
    Vector u = Vector::Zero(ch.n_cluster);
    for (int f = 0; f < N; ++f) u(f) = os->u(hh.order[f]);
    ch.g_eff = OnSiteInteraction{u};
  } else {
    ch.g_eff = transform_tensor(g_active, ch.coeffs);
  }
  return ch;
}

ClusterHamiltonian build_lattice_cluster(BathMode mode, const LatticeSpec& spec, const Matrix& h_full,
                                         const HouseholderResult& hh, double mu_frag, const ClusterOptions& opts) {
  const Matrix h_bare = build_h1(spec);
  const TwoBody g = OnSiteInteraction{Vector::Constant(spec.n_sites, spec.u)};
  return build_cluster_hamiltonian(mode, h_full, h_bare, g, hh, mu_frag, opts.core_potential);
}

ClusterHamiltonian build_molecular_cluster(BathMode mode, const IntegralSet& ints, const HouseholderResult& hh,
                                           double mu_frag) {
  return build_cluster_hamiltonian(mode, ints.h1, ints.h1, TwoBody{ints.g2}, hh, mu_frag, true);
}

FciProblem to_fci_problem(const ClusterHamiltonian& ch) {
  FciProblem p;
  p.h = ch.h_eff;
  for (int f = 0; f < ch.n_frag; ++f) p.h(f, f) -= ch.mu_frag;
  p.g = ch.g_eff;
  p.n_alpha = ch.n_elec_cluster / 2;
  p.n_beta = ch.n_elec_cluster / 2;
  return p;
}

}  // namespace hhemb
