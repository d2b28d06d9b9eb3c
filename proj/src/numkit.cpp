#include "cubmom/numkit.hpp"

#include <Eigen/Eigenvalues>

namespace cubmom::numkit {

bool is_finite(const Vec& v) { return v.allFinite(); }
bool is_finite(const Mat& m) { return m.allFinite(); }

void symmetrize(Mat& m) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = v;
      m(j, i) = v;
    }
  }
}

EigDecomp sym_eig(const SymMat& H) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(H);
  if (solver.info() != Eigen::Success) {
    const Mat recon = solver.eigenvectors() *
                      solver.eigenvalues().asDiagonal() *
                      solver.eigenvectors().transpose();
    throw EigSolveError((recon - H).cwiseAbs().maxCoeff());
  }
  return EigDecomp{solver.eigenvalues(), solver.eigenvectors()};
}

Vec solve_shifted(const EigDecomp& decomp, double gamma, const Vec& b) {
  const double shifted_min = decomp.eigenvalues(0) + gamma;
  if (!(shifted_min > 0.0)) throw SingularShiftError(shifted_min);
  const Vec coeffs = decomp.eigenvectors.transpose() * b;
  const Vec scaled =
      coeffs.array() / (decomp.eigenvalues.array() + gamma);
  return decomp.eigenvectors * scaled;
}

std::pair<double, Vec> min_eigenvalue(const SymMat& H) {
  const EigDecomp decomp = sym_eig(H);
  return {decomp.eigenvalues(0), decomp.eigenvectors.col(0)};
}

double spectral_norm(const SymMat& H) {
  if (H.rows() == 0) return 0.0;
  const EigDecomp decomp = sym_eig(H);
  const double lo = decomp.eigenvalues(0);
  const double hi = decomp.eigenvalues(decomp.eigenvalues.size() - 1);
  return std::max(hi, -lo);
}

}  // namespace cubmom::numkit
