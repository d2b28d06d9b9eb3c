#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>

namespace cubmom::numkit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Dense symmetric matrix. Every producer in this library keeps the entries
// exactly symmetric (M(i,j) == M(j,i) bitwise), so the alias carries the
// contract rather than a wrapper type.
using SymMat = Eigen::MatrixXd;

struct EigDecomp {
  Vec eigenvalues;   // ascending
  Mat eigenvectors;  // orthonormal columns, same order as eigenvalues
};

/// Iterative eigensolver failed to converge within its sweep budget.
struct EigSolveError : std::runtime_error {
  double residual;
  explicit EigSolveError(double res)
      : std::runtime_error("symmetric eigensolver did not converge, residual " +
                           std::to_string(res)),
        residual(res) {}
};

/// Requested shift makes H + gamma*I singular or indefinite.
struct SingularShiftError : std::runtime_error {
  double shifted_min;  // lambda_min + gamma
  explicit SingularShiftError(double m)
      : std::runtime_error("shifted matrix not positive definite: lambda_min + gamma = " +
                           std::to_string(m)),
        shifted_min(m) {}
};

bool is_finite(const Vec& v);
bool is_finite(const Mat& m);

// Exact pairwise averaging; idempotent on already-symmetric input.
void symmetrize(Mat& m);

/// Full symmetric eigendecomposition (tridiagonalization + implicit QL/QR),
/// eigenvalues ascending. Deterministic for a fixed input.
EigDecomp sym_eig(const SymMat& H);

/// Solves (H + gamma*I) s = b through the decomposition.
/// Requires lambda_min + gamma > 0.
Vec solve_shifted(const EigDecomp& decomp, double gamma, const Vec& b);

/// Smallest eigenvalue and a unit eigenvector.
std::pair<double, Vec> min_eigenvalue(const SymMat& H);

/// Spectral norm max(lambda_max, -lambda_min) of a symmetric matrix.
double spectral_norm(const SymMat& H);

}  // namespace cubmom::numkit
