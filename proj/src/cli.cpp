#include "hhemb/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <json.hpp>
#include <ostream>
#include <regex>
#include <sstream>

#include "hhemb/error.hpp"

#ifndef HHEMB_VERSION
#define HHEMB_VERSION "0.0.0"
#endif

namespace hhemb {

namespace fs = std::filesystem;
using nlohmann::json;

const char* version() { return HHEMB_VERSION; }

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_csv(std::ostream& out, const Table& table, const RunConfig& cfg) {
  out << "# hhemb " << version() << "\n";
  out << "# config " << cfg.config_json << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

std::vector<double> parse_grid(const std::string& spec) {
  double a, b, step;
  char c1, c2;
  std::istringstream is(spec);
  if (!(is >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0) || b < a)
    fail(ErrorCode::ParseError, "grid '" + spec + "' is not a:b:step with step > 0");
  std::vector<double> out;
  const long n = std::lround(std::floor((b - a) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
  return out;
}

std::pair<int, int> parse_range(const std::string& spec) {
  int a, b;
  char c;
  std::istringstream is(spec);
  if (!(is >> a >> c >> b) || c != ':' || a > b || a < 2)
    fail(ErrorCode::ParseError, "range '" + spec + "' is not lo:hi with 2 <= lo <= hi");
  return {a, b};
}

namespace {

LatticeSpec lattice_from(const RunConfig& cfg) {
  LatticeSpec s;
  s.n_sites = cfg.L;
  s.u = cfg.U;
  s.t = cfg.t;
  s.boundary = parse_boundary(cfg.boundary);
  validate_lattice(s);
  return s;
}

std::vector<int> fillings_from(const RunConfig& cfg, const Matrix& h) {
  if (cfg.fillings.empty() || cfg.fillings == "all") return closed_shell_fillings(h);
  std::vector<int> out;
  std::stringstream ss(cfg.fillings);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "bad filling '" + tok + "'");
    }
  }
  return out;
}

}  // namespace

HubbardOutput run_hubbard(const RunConfig& cfg) {
  const LatticeSpec spec = lattice_from(cfg);
  const Matrix h = build_h1(spec);
  const SymEig band = sym_eig(h);
  const std::vector<int> fills = fillings_from(cfg, h);
  const std::vector<double> grid = cfg.mu_scan.empty() ? std::vector<double>{} : parse_grid(cfg.mu_scan);
  HubbardOutput out;
  out.persite.columns = {"n", "e", "frag_size", "mode", "scheme", "U", "t", "L",
                         "n_per_spin", "e_meanfield", "param", "converged", "error"};
  out.muscan.columns = {"mu", "n", "e", "frag_size", "mode", "scheme", "U", "t", "L", "n_per_spin", "converged", "error"};
  const Scheme scheme = parse_scheme(cfg.scheme);
  const BathMode mode = scheme == Scheme::Lpfet ? BathMode::NIB : parse_bath(cfg.bath);
  for (int N : cfg.frag)
    if (N < 1 || N > spec.n_sites)
      fail(ErrorCode::BadPartition, "fragment size " + std::to_string(N) + " outside [1, L]");
  for (int N : cfg.frag) {
    ScanConfig sc;
    sc.scheme = scheme;
    sc.jobs = cfg.jobs;
    sc.ht.mode = mode;
    sc.ht.frag_size = N;
    sc.ht.pivot = cfg.pivot;
    sc.ht.core_potential = cfg.core_potential;
    sc.lp.frag_size = N;
    sc.lp.pivot = cfg.pivot;
    sc.lp.mixing = cfg.lpfet_mixing;
    const std::vector<FillingPoint> curve = energy_curve(spec, sc, fills);
    const std::vector<std::string> tail = {bath_name(mode), scheme_name(scheme), format_real(spec.u),
                                           format_real(spec.t), std::to_string(spec.n_sites)};
    for (const FillingPoint& p : curve) {
      double e_mf = 0.0;
      for (int i = 0; i < p.n_per_spin; ++i) e_mf += 2.0 * band.values(i);
      e_mf /= spec.n_sites;
      std::vector<std::string> row = {format_real(p.density), format_real(p.energy), std::to_string(N)};
      row.insert(row.end(), tail.begin(), tail.end());
      row.insert(row.end(), {std::to_string(p.n_per_spin), format_real(e_mf), format_real(p.param),
                             p.converged ? "1" : "0", p.error});
      out.persite.rows.push_back(row);
    }
    if (grid.empty()) continue;
    for (const ScanRow& r : scan_from_curve(spec, scheme, curve, grid)) {
      std::vector<std::string> row = {format_real(r.mu), format_real(r.n), format_real(r.e), std::to_string(N)};
      row.insert(row.end(), tail.begin(), tail.end());
      row.insert(row.end(), {std::to_string(r.n_per_spin), r.converged ? "1" : "0", r.error});
      out.muscan.rows.push_back(row);
    }
  }
  return out;
}

namespace {

struct Geometry {
  double distance;
  fs::path fcidump;
};

std::vector<Geometry> find_geometries(const std::string& where) {
  std::vector<Geometry> out;
  const std::regex num(R"(([0-9]+\.[0-9]+|[0-9]+))");
  auto distance_of = [&](const fs::path& p) {
    const std::string stem = p.stem().string();
    double d = std::nan("");
    for (auto it = std::sregex_iterator(stem.begin(), stem.end(), num); it != std::sregex_iterator(); ++it)
      d = std::stod((*it)[1].str());
    return d;
  };
  const fs::path root(where);
  if (fs::is_directory(root)) {
    for (const auto& entry : fs::directory_iterator(root))
      if (entry.path().extension() == ".fcidump") out.push_back({distance_of(entry.path()), entry.path()});
  } else if (fs::exists(root)) {
    out.push_back({distance_of(root), root});
  } else {
    fail(ErrorCode::ParseError, "no FCIDUMP at " + where);
  }
  if (out.empty()) fail(ErrorCode::ParseError, "no *.fcidump files in " + where);
  std::sort(out.begin(), out.end(), [](const Geometry& a, const Geometry& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.fcidump < b.fcidump);
  });
  return out;
}

}  // namespace

Table run_molecule(const RunConfig& cfg) {
  Table t;
  t.columns = {"d_HH", "E_HF", "E_htdmfet", "E_FCI", "pct_correlation", "frag", "mode", "mu_tilde", "converged"};
  const BathMode mode = parse_bath(cfg.bath);
  for (const Geometry& g : find_geometries(cfg.fcidump)) {
    IntegralSet ints = read_fcidump(g.fcidump.string());
    fs::path ovl = g.fcidump;
    ovl.replace_extension(".overlap");
    if (fs::exists(ovl)) ints = to_oao(ints, read_overlap(ovl.string()));
    MolecularConfig mc;
    mc.mode = mode;
    mc.pivot = cfg.mol_pivot;
    if (cfg.frag_mol == "all") {
      std::vector<int> all(ints.n_orb);
      for (int i = 0; i < ints.n_orb; ++i) all[i] = i;
      mc.fragments = {all};
    } else {
      int k = 0;
      try {
        k = std::stoi(cfg.frag_mol);
      } catch (const std::exception&) {
        fail(ErrorCode::ParseError, "--frag must be an orbital count or 'all'");
      }
      if (k < 1 || ints.n_orb % k != 0) fail(ErrorCode::PartitionNotTiling, "fragment size must divide n_orb");
      for (int s = 0; s < ints.n_orb; s += k) {
        std::vector<int> f;
        for (int i = 0; i < k; ++i) f.push_back(s + i);
        mc.fragments.push_back(f);
      }
    }
    const MolecularReport rep = htdmfet_molecule(ints, mc);
    double e_fci = std::nan("");
    try {
      FciProblem p{ints.h1, TwoBody{ints.g2}, ints.e_core, ints.n_elec / 2, ints.n_elec / 2};
      FciOptions o;
      o.dim_cap = cfg.fci_cap;
      o.want_rdm2 = false;
      e_fci = ground_state(p, o).energy;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Overflow) throw;
    }
    const double pct = std::isnan(e_fci) ? std::nan("") : 100.0 * (rep.e_hf - rep.e_embedding) / (rep.e_hf - e_fci);
    t.rows.push_back({format_real(g.distance), format_real(rep.e_hf), format_real(rep.e_embedding), format_real(e_fci),
                      format_real(pct), cfg.frag_mol, bath_name(mode), format_real(rep.mu_tilde),
                      rep.converged ? "1" : "0"});
  }
  return t;
}

bool VerifyReport::ok() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed == s.total; });
}

DensityMatrix random_meanfield(std::mt19937_64& rng, int L, int n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Matrix h(L, L);
    for (int i = 0; i < L; ++i)
      for (int j = 0; j <= i; ++j) h(i, j) = h(j, i) = nd(rng);
    try {
      return meanfield_rdm(h, n);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::FermiDegeneracy) throw;
    }
  }
  fail(ErrorCode::FermiDegeneracy, "could not draw a gapped random one-body matrix");
}

VerifyReport run_verify(const RunConfig& cfg) {
  const auto [lo, hi] = parse_range(cfg.sizes);
  std::mt19937_64 rng(cfg.seed);
  SuiteResult blockdiag{"block-diagonalization"}, trace{"cluster-trace"}, svd{"svd-equivalence"},
      weq{"w-equation"}, decoupled{"singular-coupling"};
  auto record = [](SuiteResult& s, double err, double tol) {
    ++s.total;
    if (err < tol) ++s.passed;
    s.worst = std::max(s.worst, err);
  };
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const int L = std::uniform_int_distribution<int>(lo, hi)(rng);
    const int max_n = std::max(1, std::min(4, L / 2));
    const int N = std::uniform_int_distribution<int>(1, max_n)(rng);
    const int n = std::uniform_int_distribution<int>(N, L - N)(rng);
    DensityMatrix dm = random_meanfield(rng, L, n);
    if (cfg.inject == "asymmetric") {
      dm.gamma(0, L - 1) += 1e-3;
      dm.idempotent = false;
    }
    const FragmentPartition frag = make_partition(L, [&] {
      std::vector<int> f(L);
      std::iota(f.begin(), f.end(), 0);
      std::shuffle(f.begin(), f.end(), rng);
      f.resize(N);
      return f;
    }());
    const HouseholderResult hr = build_block_householder(dm, frag);
    const ClusterBlocks cb = cluster_blocks(hr);
    const Matrix g = permute(dm.gamma, hr.order);
    const double err = std::max({max_abs(cb.gamma_ef), max_abs(cb.gamma_eb),
                                 max_abs(hr.r * hr.r - Matrix::Identity(L, L))});
    const double ff = max_abs(cb.gamma_ff - g.topLeftCorner(N, N));
    // Fragment-block preservation carries the tighter 1e-12 bound, hence the factor 100.
    record(blockdiag, std::max(err, 100.0 * ff), 1e-10);
    record(trace, std::abs(hr.gamma_tilde.topLeftCorner(2 * N, 2 * N).trace() - N), 1e-10);

    const Matrix g1 = g.block(N, 0, N, N), g2 = g.block(2 * N, 0, L - 2 * N, N);
    const double w1 = max_abs(hr.w.transpose() * hr.w - (g1.transpose() * g1 + g2.transpose() * g2));
    const double w2 = max_abs(g1.transpose() * hr.w - hr.w.transpose() * g1);
    record(weq, std::max(w1, w2), 1e-10);

    if (N <= 3) record(svd, subspace_distance(householder_bath(hr), svd_bath(dm, frag)), 1e-8);

    // The same density with the fragment decoupled must be rejected.
    Matrix gd = dm.gamma;
    for (int f = 0; f < N; ++f)
      for (int i = 0; i < L; ++i)
        if (std::find(frag.order.begin(), frag.order.begin() + N, i) == frag.order.begin() + N)
          gd(frag.order[f], i) = gd(i, frag.order[f]) = 0.0;
    ++decoupled.total;
    try {
      build_block_householder(make_density(gd, n), frag);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SingularCoupling) ++decoupled.passed;
    }
  }
  return {{blockdiag, trace, weq, svd, decoupled}};
}

namespace {

json config_to_json(const RunConfig& c) {
  json j;
  j["subcommand"] = c.subcommand;
  if (c.subcommand == "hubbard") {
    j["L"] = c.L;
    j["U"] = c.U;
    j["t"] = c.t;
    j["boundary"] = c.boundary;
    j["frag"] = c.frag;
    j["scheme"] = c.scheme;
    j["bath"] = c.bath;
    j["mu_scan"] = c.mu_scan;
    j["fillings"] = c.fillings.empty() ? "all" : c.fillings;
    j["pivot"] = c.pivot;
    j["core_potential"] = c.core_potential;
    j["lpfet_mixing"] = c.lpfet_mixing;
  } else if (c.subcommand == "molecule") {
    j["fcidump"] = c.fcidump;
    j["frag"] = c.frag_mol;
    j["bath"] = c.bath;
    j["pivot"] = c.mol_pivot;
    j["fci_cap"] = c.fci_cap;
  } else {
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["sizes"] = c.sizes;
    j["inject"] = c.inject;
  }
  j["out"] = c.out;
  return j;
}

// Turns a JSON config object into flag tokens; placed before the user's flags so those win.
std::vector<std::string> json_tokens(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw CLI::ParseError("cannot open config file " + path, CLI::ExitCodes::FileError);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw CLI::ParseError(std::string("config file: ") + e.what(), CLI::ExitCodes::ConversionError);
  }
  if (!j.is_object()) throw CLI::ParseError("config file must hold a JSON object", CLI::ExitCodes::ConversionError);
  std::vector<std::string> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string key = it.key();
    if (key == "subcommand") continue;
    std::replace(key.begin(), key.end(), '_', '-');
    const json& v = it.value();
    if (v.is_boolean()) {
      if (key == "core-potential" || key == "pivot") {
        if (!v.get<bool>()) out.push_back("--no-" + key);
        else if (key == "pivot") out.push_back("--pivot");
      } else if (v.get<bool>()) {
        out.push_back("--" + key);
      }
      continue;
    }
    out.push_back("--" + key);
    if (v.is_string()) {
      out.push_back(v.get<std::string>());
    } else if (v.is_array()) {
      std::string joined;
      for (const auto& e : v) joined += (joined.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
      out.push_back(joined);
    } else {
      out.push_back(v.dump());
    }
  }
  return out;
}

int error_exit(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  return is_invariant_violation(e.code()) ? 3 : 2;
}

void write_file(const std::string& path, const Table& t, const RunConfig& cfg) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::ParseError, "cannot write " + path);
  write_csv(f, t, cfg);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Block-Householder quantum embedding toolkit", "hhemb"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  std::string config_path;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON file with the same keys as the flags");
    sub->add_option("--out", cfg.out, "Output prefix");
    sub->add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  CLI::App* hub = app.add_subcommand("hubbard", "Embedding of a uniform 1-D Hubbard ring");
  common(hub);
  hub->add_option("--L", cfg.L, "Number of sites")->check(CLI::Range(2, 100000));
  hub->add_option("--U", cfg.U, "On-site repulsion in units of t")->check(CLI::NonNegativeNumber);
  hub->add_option("--t", cfg.t, "Hopping")->check(CLI::PositiveNumber);
  hub->add_option("--boundary", cfg.boundary, "open|periodic|antiperiodic")
      ->check(CLI::IsMember({"open", "periodic", "antiperiodic"}));
  hub->add_option("--frag", cfg.frag, "Fragment size(s), comma separated")->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  hub->add_option("--scheme", cfg.scheme, "htdmfet|lpfet")->check(CLI::IsMember({"htdmfet", "lpfet"}));
  hub->add_option("--bath", cfg.bath, "NIB|IB")->check(CLI::IsMember({"NIB", "IB"}));
  hub->add_option("--mu-scan", cfg.mu_scan, "Chemical-potential grid a:b:step");
  hub->add_option("--fillings", cfg.fillings, "'all' or comma-separated per-spin fillings");
  bool pivot_on = false, pivot_off = false;
  hub->add_flag("--pivot", pivot_on, "Pivoted choice of the gamma1 rows");
  hub->add_flag("--no-pivot", pivot_off, "Take gamma1 from the first environment sites (default)");
  bool no_core = false;
  hub->add_flag("--no-core-potential", no_core, "Drop the environment mean-field potential in IB clusters");
  hub->add_option("--lpfet-mixing", cfg.lpfet_mixing, "LPFET damping in (0, 1]")->check(CLI::Range(1e-6, 1.0));

  CLI::App* mol = app.add_subcommand("molecule", "Embedding of molecules read from FCIDUMP files");
  common(mol);
  mol->add_option("--fcidump", cfg.fcidump, "FCIDUMP file or directory of *.fcidump")->required();
  mol->add_option("--frag", cfg.frag_mol, "Orbitals per fragment, or 'all'");
  mol->add_option("--bath", cfg.bath, "NIB|IB")->check(CLI::IsMember({"NIB", "IB"}));
  mol->add_flag("--pivot", pivot_on, "Pivoted choice of the gamma1 rows (default)");
  mol->add_flag("--no-pivot", pivot_off, "Take gamma1 from the first environment orbitals");
  mol->add_option("--fci-cap", cfg.fci_cap, "Largest determinant space for the reference FCI");

  CLI::App* ver = app.add_subcommand("verify", "Randomized invariant suites");
  common(ver);
  ver->add_option("--seed", cfg.seed, "Random seed");
  ver->add_option("--trials", cfg.trials, "Trials per suite")->check(CLI::PositiveNumber);
  ver->add_option("--sizes", cfg.sizes, "Orbital-count range lo:hi");
  ver->add_option("--inject", cfg.inject, "Fault injection: asymmetric")->check(CLI::IsMember({"", "asymmetric"}));

  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    // Resolve --config first so its keys can be overridden by explicit flags.
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--config" && !args.empty()) {
        std::vector<std::string> extra = json_tokens(args[i + 1]);
        args.insert(args.begin() + 1, extra.begin(), extra.end());
        break;
      }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  cfg.core_potential = !no_core;
  cfg.pivot = pivot_on && !pivot_off;
  cfg.mol_pivot = !pivot_off;
  cfg.subcommand = app.get_subcommands().front()->get_name();
  cfg.config_json = config_to_json(cfg).dump();

  try {
    if (cfg.subcommand == "hubbard") {
      const HubbardOutput res = run_hubbard(cfg);
      write_file(cfg.out + ".persite.csv", res.persite, cfg);
      if (!cfg.mu_scan.empty()) write_file(cfg.out + ".muscan.csv", res.muscan, cfg);
      out << "wrote " << cfg.out << ".persite.csv" << (cfg.mu_scan.empty() ? "" : " and " + cfg.out + ".muscan.csv")
          << "\n";
      return 0;
    }
    if (cfg.subcommand == "molecule") {
      const Table t = run_molecule(cfg);
      write_file(cfg.out + ".pes.csv", t, cfg);
      out << "wrote " << cfg.out << ".pes.csv\n";
      return 0;
    }
    const VerifyReport rep = run_verify(cfg);
    for (const auto& s : rep.suites)
      out << s.name << ": " << s.passed << "/" << s.total << " passed (worst " << format_real(s.worst) << ")\n";
    return rep.ok() ? 0 : 3;
  } catch (const Error& e) {
    return error_exit(e, err);
  }
}

}  // namespace hhemb
