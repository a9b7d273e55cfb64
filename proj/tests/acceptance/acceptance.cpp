#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "hhemb/abinitio.hpp"
#include "hhemb/cli.hpp"
#include "hhemb/cluster.hpp"
#include "hhemb/embed.hpp"
#include "hhemb/error.hpp"
#include "hhemb/fci.hpp"
#include "hhemb/householder.hpp"
#include "hhemb/lattice.hpp"

using namespace hhemb;

namespace {

int failures = 0;

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

LatticeSpec ring(int L, double u, Boundary b = Boundary::Antiperiodic) {
  LatticeSpec s;
  s.n_sites = L;
  s.u = u;
  s.boundary = b;
  return s;
}

std::vector<int> random_fragment(std::mt19937_64& rng, int L, int N) {
  std::vector<int> f(L);
  std::iota(f.begin(), f.end(), 0);
  std::shuffle(f.begin(), f.end(), rng);
  f.resize(N);
  return f;
}

struct RandomCase {
  DensityMatrix dm;
  FragmentPartition frag;
};

std::vector<RandomCase> random_cases(std::uint64_t seed, int count, int n_max) {
  std::mt19937_64 rng(seed);
  std::vector<RandomCase> out;
  for (int k = 0; k < count; ++k) {
    const int L = std::uniform_int_distribution<int>(10, 100)(rng);
    const int N = 1 + k % n_max;
    const int n = std::uniform_int_distribution<int>(N, L - N)(rng);
    out.push_back({random_meanfield(rng, L, n), make_partition(L, random_fragment(rng, L, N))});
  }
  return out;
}

double band_energy(const LatticeSpec& s, int m) {
  const Vector e = sym_eig(build_h1(s)).values;
  return 2.0 * e.head(m).sum() / s.n_sites;
}

void block_diagonalization_and_w() {
  Timer timer;
  const std::vector<RandomCase> cases = random_cases(20240601, 500, 4);
  double ef = 0, eb = 0, ff = 0, rr = 0, tr = 0, w1 = 0, w2 = 0;
  for (const RandomCase& c : cases) {
    const HouseholderResult hr = build_block_householder(c.dm, c.frag);
    const int N = hr.n_frag, L = static_cast<int>(hr.r.rows());
    const ClusterBlocks b = cluster_blocks(hr);
    const Matrix g = permute(c.dm.gamma, hr.order);
    ef = std::max(ef, max_abs(b.gamma_ef));
    eb = std::max(eb, max_abs(b.gamma_eb));
    ff = std::max(ff, max_abs(hr.gamma_tilde.topLeftCorner(N, N) - g.topLeftCorner(N, N)));
    rr = std::max(rr, max_abs(hr.r * hr.r - Matrix::Identity(L, L)));
    tr = std::max(tr, std::abs(hr.gamma_tilde.topLeftCorner(2 * N, 2 * N).trace() - N));
    const Matrix g1 = g.block(N, 0, N, N), g2 = g.block(2 * N, 0, L - 2 * N, N);
    w1 = std::max(w1, max_abs(hr.w.transpose() * hr.w - g1.transpose() * g1 - g2.transpose() * g2));
    w2 = std::max(w2, max_abs(g1.transpose() * hr.w - hr.w.transpose() * g1));
  }
  const double t = timer.seconds();
  report("block-diagonalization", ef < 1e-10 && eb < 1e-10 && ff < 1e-12 && rr < 1e-10 && tr < 1e-10 && t < 60.0,
         fmt("500 cases: EF %.1e EB %.1e FF %.1e RR-I %.1e trace %.1e (%.1fs)", ef, eb, ff, rr, tr, t));
  report("w-equation", w1 < 1e-10 && w2 < 1e-10, fmt("same 500 cases: WtW %.1e g1tW-Wtg1 %.1e", w1, w2));
}

void non_idempotent_branch() {
  const LatticeSpec s = ring(4, 4.0, Boundary::Periodic);
  const IntegralSet ints = lattice_integrals(s, 4);
  const ClusterSolution sol = ground_state(FciProblem{ints.h1, TwoBody{ints.g2}, 0.0, 2, 2});
  const DensityMatrix dm = make_density(0.5 * sol.rdm1, 2);
  const ClusterBlocks b = cluster_blocks(build_block_householder(dm, make_partition(4, {0})));
  const double ef = max_abs(b.gamma_ef), eb = max_abs(b.gamma_eb);
  report("non-idempotent-branch", !dm.idempotent && ef < 1e-10 && eb > 1e-3,
         fmt("4-site FCI gamma: EF %.1e, EB %.3e", ef, eb));
}

void svd_equivalence() {
  Timer timer;
  const std::vector<RandomCase> cases = random_cases(777, 100, 3);
  double worst = 0.0;
  for (const RandomCase& c : cases)
    worst = std::max(worst, subspace_distance(householder_bath(build_block_householder(c.dm, c.frag)),
                                              svd_bath(c.dm, c.frag)));
  const double t = timer.seconds();
  report("svd-equivalence", worst < 1e-8 && t < 30.0, fmt("100 cases: worst distance %.1e (%.1fs)", worst, t));
}

void non_interacting() {
  Timer timer;
  const LatticeSpec s = ring(400, 0.0);
  std::vector<int> fills;
  for (int k = 1; k <= 20; ++k) fills.push_back(20 * k - 10);  // even m, closed shells
  double worst = 0.0;
  std::vector<double> errs(fills.size(), 0.0);
  parallel_for(static_cast<int>(fills.size()), jobs(), [&](int i) {
    const int m = fills[i];
    const double ref = band_energy(s, m);
    double w = 0.0;
    for (BathMode mode : {BathMode::NIB, BathMode::IB})
      for (int N : {1, 2, 3}) {
        HtDmfetConfig c;
        c.mode = mode;
        c.frag_size = N;
        const EmbeddingReport r = htdmfet_lattice(s, c, m);
        w = std::max(w, r.converged ? std::abs(r.per_site_energy - ref) : 1.0);
      }
    for (int N : {1, 2, 3}) {
      LpfetConfig c;
      c.frag_size = N;
      const EmbeddingReport r = lpfet_at_filling(s, c, m);
      w = std::max(w, r.converged ? std::abs(r.per_site_energy - ref) : 1.0);
    }
    errs[i] = w;
  });
  for (double e : errs) worst = std::max(worst, e);
  HtDmfetConfig c;
  const double half = htdmfet_lattice(s, c, 200).per_site_energy;
  const double dev = std::abs(half + 4.0 / M_PI);
  const double t = timer.seconds();
  report("non-interacting-exactness", worst < 1e-8 && dev < 2e-3 && t < 120.0,
         fmt("20 fillings, NIB/IB/LPFET x frag 1-3: worst %.1e; e(1) = %.6f vs -4/pi (%.1e) (%.1fs)", worst, half,
             dev, t));
}

void small_rings() {
  Timer timer;
  struct Ring {
    int L, m;
    Boundary b;
  };
  double whole = 0.0;
  bool improves = true;
  std::string golden;
  for (const Ring& rg : {Ring{6, 3, Boundary::Periodic}, Ring{8, 4, Boundary::Antiperiodic}}) {
    for (double u : {2.0, 4.0, 8.0}) {
      const LatticeSpec s = ring(rg.L, u, rg.b);
      const IntegralSet ints = lattice_integrals(s, 2 * rg.m);
      FciOptions o;
      o.want_rdm2 = false;
      const double exact =
          ground_state(FciProblem{ints.h1, TwoBody{OnSiteInteraction{Vector::Constant(rg.L, u)}}, 0.0, rg.m, rg.m}, o)
              .energy /
          rg.L;
      for (BathMode mode : {BathMode::NIB, BathMode::IB}) {
        HtDmfetConfig c;
        c.mode = mode;
        c.frag_size = rg.L;
        whole = std::max(whole, std::abs(htdmfet_lattice(s, c, rg.m).per_site_energy - exact));
        if (u != 8.0) continue;
        double err[4] = {};
        for (int N = 1; N <= 3; ++N) {
          c.frag_size = N;
          err[N] = std::abs(htdmfet_lattice(s, c, rg.m).per_site_energy - exact);
        }
        improves = improves && err[3] <= err[1];
        golden += fmt(" L%d %s err1 %.2e err3 %.2e;", rg.L, bath_name(mode), err[1], err[3]);
      }
    }
  }
  const double t = timer.seconds();
  report("small-ring-oracle", whole < 1e-8 && improves && t < 300.0,
         fmt("whole-ring vs FCI %.1e; U=8:%s (%.1fs)", whole, golden.c_str(), t));
}

// Largest contiguous run of grid points with |n - 1| < 0.02, as a mu width.
double half_filling_window(const std::vector<ScanRow>& rows) {
  double best = 0.0;
  std::size_t k = 0;
  while (k < rows.size()) {
    if (!(std::abs(rows[k].n - 1.0) < 0.02)) {
      ++k;
      continue;
    }
    std::size_t j = k;
    while (j + 1 < rows.size() && std::abs(rows[j + 1].n - 1.0) < 0.02) ++j;
    best = std::max(best, rows[j].mu - rows[k].mu);
    k = j + 1;
  }
  return best;
}

void gap_and_particle_hole() {
  Timer timer;
  const LatticeSpec s = ring(400, 8.0);
  std::vector<double> grid;
  for (int k = 0; k <= 240; ++k) grid.push_back(-2.0 + 0.05 * k);
  for (double d : {1.0, 2.0, 4.0}) {
    grid.push_back(4.0 + d);
    grid.push_back(4.0 - d);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             grid.end());
  const std::vector<int> fills = closed_shell_fillings(build_h1(s));

  auto scan = [&](BathMode mode, int N) {
    ScanConfig cfg;
    cfg.ht.mode = mode;
    cfg.ht.frag_size = N;
    cfg.jobs = jobs();
    return scan_from_curve(s, Scheme::HtDmfet, energy_curve(s, cfg, fills), grid);
  };
  auto n_at = [&](const std::vector<ScanRow>& rows, double mu) {
    for (const ScanRow& r : rows)
      if (std::abs(r.mu - mu) < 1e-9) return r.n;
    return std::nan("");
  };

  const std::vector<ScanRow> ib2 = scan(BathMode::IB, 2);
  const std::vector<ScanRow> ib3 = scan(BathMode::IB, 3);
  const std::vector<ScanRow> nib1 = scan(BathMode::NIB, 1);
  const double w2 = half_filling_window(ib2), w3 = half_filling_window(ib3), w1 = half_filling_window(nib1);
  const double t = timer.seconds();
  report("gap-opening", w2 >= 1.0 && w3 >= 1.0 && w1 < 1.0 && t < 1800.0,
         fmt("|n-1|<0.02 window: IB frag2 %.2f, IB frag3 %.2f, NIB frag1 %.2f (grid step 0.05) (%.1fs)", w2, w3, w1,
             t));

  double worst = 0.0;
  std::string detail;
  for (const auto* rows : {&ib2, &ib3})
    for (double d : {1.0, 2.0, 4.0}) {
      const double sum = n_at(*rows, 4.0 + d) + n_at(*rows, 4.0 - d);
      worst = std::max(worst, std::isnan(sum) ? 1.0 : std::abs(sum - 2.0));
    }
  report("particle-hole", worst < 2e-3, fmt("IB frag 2/3, delta 1,2,4: worst |n(4+d)+n(4-d)-2| = %.1e", worst));
}

void molecular() {
  Timer timer;
  const std::string dir = std::string(HHEMB_FIXTURES) + "/h4/";
  const char* tags[] = {"0.800", "1.000", "1.200", "1.500", "1.800", "2.200"};
  const std::string designated = "1.500";
  bool ok = true;
  std::string detail;
  for (const char* tag : tags) {
    const std::string base = dir + "h4_d" + tag;
    const IntegralSet ints = to_oao(read_fcidump(base + ".fcidump"), read_overlap(base + ".overlap"));
    const ScfResult scf = rhf(ints);
    const double efci = ground_state(FciProblem{ints.h1, TwoBody{ints.g2}, ints.e_core, 2, 2}).energy;
    MolecularConfig atoms;
    atoms.fragments = {{0}, {1}, {2}, {3}};
    const MolecularReport a = htdmfet_molecule(ints, atoms);
    const double pct = 100.0 * (scf.e_total - a.e_embedding) / (scf.e_total - efci);
    detail += fmt(" %s:%.1f%%", tag, pct);
    if (tag == designated) {
      MolecularConfig whole;
      whole.fragments = {{0, 1, 2, 3}};
      const double dw = std::abs(htdmfet_molecule(ints, whole).e_embedding - efci);
      ok = scf.commutator < 1e-8 && a.converged && pct >= 85.0 && dw < 1e-8;
      detail = fmt("d=%s A: [F,g] %.1e, whole-molecule vs FCI %.1e, recovery %.1f%%; all d:", tag, scf.commutator, dw,
                   pct) +
               detail;
    }
  }
  report("molecular-pipeline", ok, detail + fmt(" (%.1fs)", timer.seconds()));
}

}  // namespace

int main() {
  try {
    block_diagonalization_and_w();
    non_idempotent_branch();
    svd_equivalence();
    non_interacting();
    small_rings();
    gap_and_particle_hole();
    molecular();
  } catch (const Error& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
