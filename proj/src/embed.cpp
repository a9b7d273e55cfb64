#include "hhemb/embed.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "hhemb/error.hpp"

namespace hhemb {

namespace {

double default_lo(const LatticeSpec& s) { return -2.0 * s.u - 4.0 * s.t; }
double default_hi(const LatticeSpec& s) { return 2.0 * s.u + 4.0 * s.t; }

// Filled-band or empty-band lattice: no bath exists, the energy is analytic.
bool trivial_filling(const LatticeSpec& spec, int m, const FragmentPartition& frag, EmbeddingReport& rep) {
  const int L = spec.n_sites;
  if (m != 0 && m != L) return false;
  if (frag.n_frag == L) return false;
  const Matrix h = build_h1(spec);
  rep.converged = true;
  rep.n_per_spin = m;
  rep.density = 2.0 * m / L;
  rep.cluster_density = rep.density;
  double e = 0.0;
  if (m == L)
    for (int f = 0; f < frag.n_frag; ++f) e += 2.0 * h(frag.order[f], frag.order[f]) + spec.u;
  rep.per_site_energy = e / frag.n_frag;
  rep.message = m == 0 ? "empty lattice" : "filled band";
  return true;
}

FciOptions scan_options() {
  FciOptions o;
  o.want_rdm2 = false;
  return o;
}

}  // namespace

RootResult find_level(const std::function<double(double)>& f, double target, double x0, double lo, double hi,
                      double tol, int max_iter, std::vector<std::pair<double, double>>* trace) {
  RootResult res;
  auto eval = [&](double x) {
    const double v = f(x);
    ++res.evaluations;
    if (trace) trace->emplace_back(x, v);
    return v;
  };
  x0 = std::clamp(x0, lo, hi);
  double fx0 = eval(x0);
  res.x = x0;
  res.fx = fx0;
  if (std::abs(fx0 - target) < tol) {
    res.converged = true;
    return res;
  }
  // Step outward until the target is bracketed.
  const double dir = fx0 < target ? 1.0 : -1.0;
  double a = x0, fa = fx0, b = x0, fb = fx0;
  double step = 0.25 * std::max(1.0, 0.05 * (hi - lo));
  bool bracketed = false;
  while (res.evaluations < max_iter) {
    const double xn = std::clamp(b + dir * step, lo, hi);
    const double fn = eval(xn);
    if (std::abs(fn - target) < tol) {
      res.converged = true;
      res.x = xn;
      res.fx = fn;
      return res;
    }
    a = b;
    fa = fb;
    b = xn;
    fb = fn;
    if ((fn - target) * (fx0 - target) < 0) {
      bracketed = true;
      break;
    }
    if (xn == lo || xn == hi) break;
    step *= 2.0;
  }
  res.x = b;
  res.fx = fb;
  if (!bracketed) return res;
  if (a > b) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  // Illinois regula falsi with a bisection safeguard.
  int side = 0;
  double width = b - a;
  int slow = 0;
  while (res.evaluations < max_iter) {
    double x;
    const double ga = fa - target, gb = fb - target;
    if (slow >= 2) {
      x = 0.5 * (a + b);
      slow = 0;
    } else {
      x = (a * gb - b * ga) / (gb - ga);
      if (!(x > a && x < b)) x = 0.5 * (a + b);
    }
    const double fxv = eval(x);
    res.x = x;
    res.fx = fxv;
    if (std::abs(fxv - target) < tol) {
      res.converged = true;
      return res;
    }
    if (fxv < target) {
      a = x;
      fa = fxv;
      if (side == -1) fb = target + 0.5 * (fb - target);
      side = -1;
    } else {
      b = x;
      fb = fxv;
      if (side == 1) fa = target + 0.5 * (fa - target);
      side = 1;
    }
    if (b - a > 0.5 * width) ++slow;
    width = b - a;
    if (width <= 1e-15 * (1.0 + std::abs(a))) break;
  }
  return res;
}

FragmentPartition ring_fragment(int n_sites, int start, int size) {
  std::vector<int> sites;
  for (int i = 0; i < size; ++i) sites.push_back(((start + i) % n_sites + n_sites) % n_sites);
  return make_partition(n_sites, sites);
}

double per_site_energy(const ClusterSolution& sol, const ClusterHamiltonian& ch, double u) {
  const int N = ch.n_frag;
  double e = 0.0;
  for (int f = 0; f < N; ++f) {
    for (int q = 0; q < ch.n_cluster; ++q) e += ch.h_bare(f, q) * sol.rdm1(q, f);
    e += u * 0.5 * sol.rdm2(f, f, f, f);
  }
  return e / N;
}

EmbeddingReport htdmfet_lattice(const LatticeSpec& spec, const HtDmfetConfig& cfg, int n_per_spin) {
  validate_lattice(spec);
  const int L = spec.n_sites;
  const FragmentPartition frag = ring_fragment(L, cfg.frag_start, cfg.frag_size);
  EmbeddingReport rep;
  if (trivial_filling(spec, n_per_spin, frag, rep)) return rep;

  const Matrix h = build_h1(spec);
  const DensityMatrix dm = meanfield_rdm(h, n_per_spin);
  const HouseholderResult hh = build_block_householder(dm, frag, {cfg.pivot});
  ClusterHamiltonian ch = build_lattice_cluster(cfg.mode, spec, h, hh, 0.0, {cfg.core_potential});
  const int N = cfg.frag_size;
  const ShiftedSolver solver(to_fci_problem(ch), N, scan_options());

  rep.n_per_spin = n_per_spin;
  rep.density = 2.0 * n_per_spin / L;
  const double target = std::isnan(cfg.target_density) ? rep.density : cfg.target_density;
  const double lo = std::isnan(cfg.bracket_lo) ? default_lo(spec) : cfg.bracket_lo;
  const double hi = std::isnan(cfg.bracket_hi) ? default_hi(spec) : cfg.bracket_hi;
  const auto occ = [&](double mu) { return solver.occupation(mu) / N; };
  const RootResult root = find_level(occ, target, 0.0, lo, hi, cfg.tol_occ, cfg.max_root_iters, &rep.trace);
  if (!root.converged) {
    const bool straddled = std::any_of(rep.trace.begin(), rep.trace.end(), [&](auto& p) { return p.second > target; }) &&
                           std::any_of(rep.trace.begin(), rep.trace.end(), [&](auto& p) { return p.second < target; });
    if (!straddled)
      fail(ErrorCode::RootBracketFailure, "fragment occupation does not reach " + std::to_string(target) +
                                              " within [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  rep.converged = root.converged;
  rep.iterations = root.evaluations;
  rep.mu_tilde = root.x;
  ch.mu_frag = root.x;
  rep.cluster_solution = solver.solve(root.x, true);
  double nf = 0.0;
  for (int f = 0; f < N; ++f) nf += rep.cluster_solution.rdm1(f, f);
  rep.cluster_density = nf / N;
  rep.residual = std::abs(rep.cluster_density - target);
  rep.per_site_energy = per_site_energy(rep.cluster_solution, ch, spec.u);
  return rep;
}

EmbeddingReport lpfet_at_filling(const LatticeSpec& spec, const LpfetConfig& cfg, int n_per_spin) {
  validate_lattice(spec);
  if (!is_uniform(spec)) fail(ErrorCode::BadPotentialLength, "LPFET is implemented for uniform rings only");
  const int L = spec.n_sites;
  const FragmentPartition frag = ring_fragment(L, cfg.frag_start, cfg.frag_size);
  EmbeddingReport rep;
  if (trivial_filling(spec, n_per_spin, frag, rep)) {
    rep.v_hxc = n_per_spin == 0 ? 0.0 : spec.u;
    return rep;
  }
  const Matrix h = build_h1(spec);
  const DensityMatrix dm = meanfield_rdm(h, n_per_spin);
  const HouseholderResult hh = build_block_householder(dm, frag, {cfg.pivot});
  const int N = cfg.frag_size;
  // A uniform v_hxc shifts every cluster orbital except the fragment ones, where the
  // interaction is explicit: equivalent to a fragment potential -v_hxc up to a constant.
  ClusterHamiltonian ch = build_lattice_cluster(BathMode::NIB, spec, h, hh, 0.0);
  const ShiftedSolver solver(to_fci_problem(ch), N, scan_options());

  rep.n_per_spin = n_per_spin;
  rep.density = 2.0 * n_per_spin / L;
  const double n_ks = rep.density;
  const double lo0 = default_lo(spec), hi0 = default_hi(spec);
  double lo = lo0, hi = hi0;
  bool have_lo = false, have_hi = false;
  double v = 0.0, v_prev = 0.0, r_prev = 0.0;
  bool have_prev = false;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const double n_cl = solver.occupation(v) / N;
    rep.trace.emplace_back(v, n_cl);
    rep.iterations = it;
    const double r = n_cl - n_ks;
    if (std::abs(r) < cfg.tol_density) {
      rep.converged = true;
      break;
    }
    if (r < 0) {
      lo = v;
      have_lo = true;
    } else {
      hi = v;
      have_hi = true;
    }
    double slope = 0.5;
    if (have_prev && v != v_prev) {
      const double s = (r - r_prev) / (v - v_prev);
      if (s > 1e-12) slope = s;
    }
    v_prev = v;
    r_prev = r;
    have_prev = true;
    double vn = v - cfg.mixing * r / slope;
    if (have_lo && have_hi) {
      if (!(vn > lo && vn < hi)) vn = 0.5 * (lo + hi);
    } else {
      vn = std::clamp(vn, lo0, hi0);
      if (vn == v) break;
    }
    v = vn;
  }
  rep.v_hxc = v;
  rep.mu_tilde = v;
  ch.mu_frag = v;
  rep.cluster_solution = solver.solve(v, true);
  double nf = 0.0;
  for (int f = 0; f < N; ++f) nf += rep.cluster_solution.rdm1(f, f);
  rep.cluster_density = nf / N;
  rep.residual = std::abs(rep.cluster_density - n_ks);
  rep.per_site_energy = per_site_energy(rep.cluster_solution, ch, spec.u);
  if (!rep.converged)
    fail(ErrorCode::NoConvergence, "LPFET density matching stalled at residual " + std::to_string(rep.residual));
  return rep;
}

EmbeddingReport lpfet(const LatticeSpec& spec, const LpfetConfig& cfg) {
  validate_lattice(spec);
  const Matrix h = build_h1(spec);
  const SymEig e = sym_eig(h);
  const std::vector<int> fills = closed_shell_fillings(h);
  const int L = spec.n_sites;
  std::map<int, EmbeddingReport> cache;
  auto at = [&](int m) -> const EmbeddingReport& {
    auto it = cache.find(m);
    if (it == cache.end()) it = cache.emplace(m, lpfet_at_filling(spec, cfg, m)).first;
    return it->second;
  };
  auto homo = [&](int m) { return m == 0 ? -std::numeric_limits<double>::infinity() : e.values(m - 1) + at(m).v_hxc; };
  auto lumo = [&](int m) { return m == L ? std::numeric_limits<double>::infinity() : e.values(m) + at(m).v_hxc; };
  // Largest closed-shell filling whose KS HOMO lies at or below mu.
  int lo = 0, hi = static_cast<int>(fills.size()) - 1;
  if (homo(fills[hi]) <= cfg.mu_lattice) lo = hi;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (homo(fills[mid]) <= cfg.mu_lattice)
      lo = mid;
    else
      hi = mid;
  }
  const int m = fills[lo];
  EmbeddingReport rep = at(m);
  const bool inside = cfg.mu_lattice < lumo(m);
  rep.converged = rep.converged && inside;
  if (!inside) rep.message = "mu falls between the KS windows of consecutive closed-shell fillings";
  return rep;
}

void check_tiling(const std::vector<std::vector<int>>& fragments, int n_orb) {
  std::vector<int> seen(n_orb, 0);
  for (const auto& f : fragments)
    for (int i : f) {
      if (i < 0 || i >= n_orb) fail(ErrorCode::PartitionNotTiling, "fragment orbital out of range");
      if (seen[i]++) fail(ErrorCode::PartitionNotTiling, "orbital " + std::to_string(i) + " in two fragments");
    }
  for (int i = 0; i < n_orb; ++i)
    if (!seen[i]) fail(ErrorCode::PartitionNotTiling, "orbital " + std::to_string(i) + " not covered");
}

double democratic_energy(const std::vector<ClusterHamiltonian>& clusters, const std::vector<ClusterSolution>& sols,
                         const std::vector<std::vector<int>>& fragments, int n_orb, double e_nuc) {
  check_tiling(fragments, n_orb);
  if (clusters.size() != fragments.size() || sols.size() != fragments.size())
    fail(ErrorCode::DimensionMismatch, "one cluster and one solution per fragment expected");
  double e = e_nuc;
  for (std::size_t j = 0; j < clusters.size(); ++j) {
    const ClusterHamiltonian& ch = clusters[j];
    const ClusterSolution& sol = sols[j];
    const int nc = ch.n_cluster;
    for (int f = 0; f < ch.n_frag; ++f) {
      for (int q = 0; q < nc; ++q) e += 0.5 * (ch.h_bare(f, q) + ch.h_eff(f, q)) * sol.rdm1(q, f);
      if (const auto* os = std::get_if<OnSiteInteraction>(&ch.g_eff)) {
        e += 0.5 * os->u(f) * sol.rdm2(f, f, f, f);
        continue;
      }
      const auto& g = std::get<Tensor4>(ch.g_eff);
      for (int q = 0; q < nc; ++q)
        for (int r = 0; r < nc; ++r)
          for (int s = 0; s < nc; ++s) e += 0.5 * g(f, q, r, s) * sol.rdm2(f, q, r, s);
    }
  }
  return e;
}

MolecularReport htdmfet_molecule(const IntegralSet& ints, const MolecularConfig& cfg) {
  const int n = ints.n_orb;
  check_tiling(cfg.fragments, n);
  MolecularReport rep;
  rep.scf = rhf(ints);
  rep.e_hf = rep.scf.e_total;

  std::vector<ShiftedSolver> solvers;
  for (const auto& f : cfg.fragments) {
    const FragmentPartition part = make_partition(n, f);
    const HouseholderResult hh = build_block_householder(rep.scf.gamma, part, {cfg.pivot});
    rep.clusters.push_back(build_molecular_cluster(cfg.mode, ints, hh, 0.0));
    solvers.emplace_back(to_fci_problem(rep.clusters.back()), part.n_frag, scan_options());
  }
  const auto total = [&](double mu) {
    double acc = 0.0;
    for (const auto& s : solvers) acc += s.occupation(mu);
    return acc;
  };
  const RootResult root =
      find_level(total, ints.n_elec, 0.0, -cfg.bracket, cfg.bracket, cfg.tol_occ, cfg.max_root_iters);
  if (!root.converged && std::abs(root.fx - ints.n_elec) > 0.5)
    fail(ErrorCode::RootBracketFailure, "fragment electron count cannot reach " + std::to_string(ints.n_elec));
  rep.converged = root.converged;
  rep.mu_tilde = root.x;
  rep.iterations = root.evaluations;
  rep.electron_count = 0.0;
  for (std::size_t j = 0; j < solvers.size(); ++j) {
    rep.clusters[j].mu_frag = root.x;
    rep.solutions.push_back(solvers[j].solve(root.x, true));
    for (int f = 0; f < rep.clusters[j].n_frag; ++f) rep.electron_count += rep.solutions.back().rdm1(f, f);
  }
  rep.e_embedding = democratic_energy(rep.clusters, rep.solutions, cfg.fragments, n, ints.e_core);
  return rep;
}

const char* scheme_name(Scheme s) { return s == Scheme::HtDmfet ? "htdmfet" : "lpfet"; }

Scheme parse_scheme(const std::string& s) {
  if (s == "htdmfet") return Scheme::HtDmfet;
  if (s == "lpfet") return Scheme::Lpfet;
  fail(ErrorCode::ParseError, "unknown scheme '" + s + "'");
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

FillingPoint energy_at_filling(const LatticeSpec& spec, const ScanConfig& cfg, int n_per_spin) {
  FillingPoint pt;
  pt.n_per_spin = n_per_spin;
  pt.density = 2.0 * n_per_spin / spec.n_sites;
  try {
    const EmbeddingReport r = cfg.scheme == Scheme::HtDmfet ? htdmfet_lattice(spec, cfg.ht, n_per_spin)
                                                            : lpfet_at_filling(spec, cfg.lp, n_per_spin);
    pt.energy = r.per_site_energy;
    pt.param = cfg.scheme == Scheme::HtDmfet ? r.mu_tilde : r.v_hxc;
    pt.converged = r.converged;
  } catch (const Error& e) {
    pt.error = e.what();
  }
  return pt;
}

std::vector<FillingPoint> energy_curve(const LatticeSpec& spec, const ScanConfig& cfg, const std::vector<int>& fillings) {
  std::vector<FillingPoint> out(fillings.size());
  parallel_for(static_cast<int>(fillings.size()), cfg.jobs,
               [&](int i) { out[i] = energy_at_filling(spec, cfg, fillings[i]); });
  return out;
}

std::vector<ScanRow> scan_from_curve(const LatticeSpec& spec, Scheme scheme, const std::vector<FillingPoint>& curve,
                                     const std::vector<double>& mu_grid) {
  const Matrix h = build_h1(spec);
  const int L = spec.n_sites;
  std::vector<ScanRow> rows;
  rows.reserve(mu_grid.size());

  if (scheme == Scheme::HtDmfet) {
    // n(mu) minimizes e(n) - mu n over the embedded closed-shell fillings.
    for (double mu : mu_grid) {
      ScanRow row;
      row.mu = mu;
      int best = -1;
      double best_val = 0.0;
      for (std::size_t i = 0; i < curve.size(); ++i) {
        if (!curve[i].error.empty() || !curve[i].converged) continue;
        const double val = curve[i].energy - mu * curve[i].density;
        if (best < 0 || val < best_val - 1e-12) {
          best = static_cast<int>(i);
          best_val = val;
        }
      }
      if (best < 0) {
        row.error = "no converged filling";
      } else {
        row.n = curve[best].density;
        row.e = curve[best].energy;
        row.n_per_spin = curve[best].n_per_spin;
        row.converged = true;
      }
      rows.push_back(row);
    }
    return rows;
  }

  const SymEig e = sym_eig(h);
  for (double mu : mu_grid) {
    ScanRow row;
    row.mu = mu;
    int pick = -1;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      if (!curve[i].error.empty()) continue;
      const int m = curve[i].n_per_spin;
      const double homo = m == 0 ? -std::numeric_limits<double>::infinity() : e.values(m - 1) + curve[i].param;
      if (homo <= mu) pick = static_cast<int>(i);
    }
    if (pick < 0) {
      row.error = "no converged filling";
    } else {
      const FillingPoint& p = curve[pick];
      const double lumo = p.n_per_spin == L ? std::numeric_limits<double>::infinity() : e.values(p.n_per_spin) + p.param;
      row.n = p.density;
      row.e = p.energy;
      row.n_per_spin = p.n_per_spin;
      row.converged = p.converged && mu < lumo;
      if (mu >= lumo) row.error = "mu between KS windows";
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<ScanRow> mu_scan(const LatticeSpec& spec, const ScanConfig& cfg, const std::vector<double>& mu_grid) {
  const std::vector<int> fills = closed_shell_fillings(build_h1(spec));
  return scan_from_curve(spec, cfg.scheme, energy_curve(spec, cfg, fills), mu_grid);
}

}  // namespace hhemb
