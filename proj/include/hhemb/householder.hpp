#pragma once

#include <optional>
#include <vector>

#include "hhemb/linalg.hpp"

namespace hhemb {

// Per-spin 1-RDM. `idempotent` is a certificate, set only after checking ||g^2 - g|| <= 1e-10.
struct DensityMatrix {
  Matrix gamma;
  int n_elec_per_spin = 0;
  bool idempotent = false;
};

DensityMatrix make_density(const Matrix& gamma, int n_elec_per_spin);
double idempotency_error(const Matrix& gamma);

struct FragmentPartition {
  std::vector<int> order;  // fragment orbitals first
  int n_frag = 0;
};

// Fragment indices first (in the given order), remaining orbitals ascending.
FragmentPartition make_partition(int n_total, const std::vector<int>& fragment);
void validate_partition(const FragmentPartition& frag, int n_total);
Matrix permute(const Matrix& a, const std::vector<int>& order);
Matrix unpermute(const Matrix& a, const std::vector<int>& order);

enum class ReflectionStatus { Reflected, AlreadySparse, ZeroColumn };

struct ScalarReflection {
  Matrix r;
  ReflectionStatus status = ReflectionStatus::Reflected;
};

ScalarReflection scalar_householder(const Vector& x, int pivot);

struct ColumnBlocks {
  Matrix gamma_ff;
  Matrix gamma1;
  Matrix gamma2;
};

ColumnBlocks partition_columns(const DensityMatrix& dm, const FragmentPartition& frag);

struct HouseholderOptions {
  bool pivot = false;  // choose the gamma1 rows by column-pivoted QR
};

// All matrices live in the permuted basis given by `order`.
struct HouseholderResult {
  Matrix r;
  Matrix v;
  Matrix gamma_tilde;
  Matrix w;
  int n_frag = 0;
  std::vector<int> order;
  bool idempotent_source = false;
};

HouseholderResult build_block_householder(const DensityMatrix& dm, const FragmentPartition& frag,
                                          const HouseholderOptions& opts = {});

struct ClusterBlocks {
  Matrix gamma_ff;
  Matrix gamma_bf;
  Matrix gamma_bb;
  Matrix gamma_eb;
  Matrix gamma_ee;
  Matrix gamma_ef;
};

int cluster_size(const HouseholderResult& hr);
ClusterBlocks cluster_blocks(const HouseholderResult& hr);

// Cluster orbitals in the original orbital basis: fragment columns, then bath columns.
Matrix cluster_coeffs(const HouseholderResult& hr);

// Environment 1-RDM (per spin) in the original basis.
Matrix environment_density(const HouseholderResult& hr);

struct BathSpace {
  Matrix coeffs;
  std::optional<Vector> singular_values;
};

BathSpace householder_bath(const HouseholderResult& hr);
BathSpace svd_bath(const DensityMatrix& dm, const FragmentPartition& frag);
double subspace_distance(const BathSpace& a, const BathSpace& b);

}  // namespace hhemb
