#pragma once

#include <Eigen/Dense>

namespace hhemb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SymEig {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns
};

// Largest absolute entry; the matrix norm used for every tolerance here.
double max_abs(const Matrix& a);
double asymmetry(const Matrix& a);

SymEig sym_eig(const Matrix& a);
Matrix spd_sqrt(const Matrix& a);
Matrix spd_inv_sqrt(const Matrix& a);
Matrix solve(const Matrix& a, const Matrix& b);

// Orthonormal basis for the column span of a (thin Householder QR).
Matrix orthonormalize(const Matrix& a);

}  // namespace hhemb
