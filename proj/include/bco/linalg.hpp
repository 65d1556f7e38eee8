#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace bco {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One RNG type everywhere so that (config, seed) pins every trace.
using Rng = std::mt19937_64;

inline Matrix Symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline bool AllFinite(const Vector& x) { return x.allFinite(); }

inline Vector StandardNormal(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector w(d);
  for (int i = 0; i < d; ++i) w(i) = normal(rng);
  return w;
}

inline Vector RandomUnitVector(int d, Rng& rng) {
  Vector u = StandardNormal(d, rng);
  double norm = u.norm();
  while (norm == 0.0) {
    u = StandardNormal(d, rng);
    norm = u.norm();
  }
  return u / norm;
}

// x^T A x
inline double QuadForm(const Matrix& a, const Vector& x) { return x.dot(a * x); }

// Eigenvalue floor applied to a symmetric matrix. Returns the number of
// eigenvalues that were raised.
struct FlooredMatrix {
  Matrix matrix;
  Eigen::VectorXd eigenvalues;
  Matrix eigenvectors;
  int raised = 0;
};

inline FlooredMatrix FloorEigenvalues(const Matrix& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Symmetrized(m));
  FlooredMatrix out;
  out.eigenvalues = eig.eigenvalues();
  out.eigenvectors = eig.eigenvectors();
  for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
    if (out.eigenvalues(i) < floor) {
      out.eigenvalues(i) = floor;
      ++out.raised;
    }
  }
  if (out.raised > 0) {
    out.matrix = out.eigenvectors * out.eigenvalues.asDiagonal() * out.eigenvectors.transpose();
    out.matrix = Symmetrized(out.matrix);
  } else {
    out.matrix = Symmetrized(m);
  }
  return out;
}

}  // namespace bco
