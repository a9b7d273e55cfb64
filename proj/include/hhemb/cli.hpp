#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "hhemb/embed.hpp"

namespace hhemb {

const char* version();

struct RunConfig {
  std::string subcommand;
  // lattice
  int L = 400;
  double U = 8.0;
  double t = 1.0;
  std::string boundary = "antiperiodic";
  std::vector<int> frag = {1};
  std::string scheme = "htdmfet";
  std::string bath = "IB";
  std::string mu_scan;   // "a:b:step"
  std::string fillings;  // "all" or comma list of per-spin fillings
  bool pivot = false;
  bool core_potential = true;
  double lpfet_mixing = 1.0;
  // molecule
  std::string fcidump;  // file or directory
  std::string frag_mol = "1";  // orbitals per fragment, or "all"
  std::size_t fci_cap = 2000000;
  bool mol_pivot = true;
  // verify
  std::uint64_t seed = 20240601;
  int trials = 200;
  std::string sizes = "10:100";
  std::string inject;
  // io
  std::string out = "hhemb";
  int jobs = 1;
  std::string config_json;  // full resolved config, written into CSV headers
};

// Exit codes: 0 ok, 1 usage, 2 numerical failure, 3 invariant violation.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string format_real(double v);
void write_csv(std::ostream& out, const Table& table, const RunConfig& cfg);

struct HubbardOutput {
  Table persite;
  Table muscan;  // empty when no scan was requested
};

HubbardOutput run_hubbard(const RunConfig& cfg);
Table run_molecule(const RunConfig& cfg);

struct SuiteResult {
  std::string name;
  int passed = 0;
  int total = 0;
  double worst = 0.0;
};

struct VerifyReport {
  std::vector<SuiteResult> suites;
  bool ok() const;
};

// Random symmetric one-body matrix filled with n electrons per spin, gapped at the Fermi level.
DensityMatrix random_meanfield(std::mt19937_64& rng, int L, int n);

VerifyReport run_verify(const RunConfig& cfg);

std::vector<double> parse_grid(const std::string& spec);
std::pair<int, int> parse_range(const std::string& spec);

}  // namespace hhemb
