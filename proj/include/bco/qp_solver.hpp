#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "bco/geometry.hpp"

namespace bco {

// {x : ||x - center||^2_metric <= radius_sq}
struct EllipsoidConstraint {
  Vector center;
  Matrix metric;
  double radius_sq = 0.0;
  Vector eigenvalues;
  Matrix eigenvectors;

  static EllipsoidConstraint Make(Vector center, const Matrix& metric, double radius_sq);
  // Reuses an eigendecomposition the caller already has.
  static EllipsoidConstraint Make(Vector center, Matrix metric, double radius_sq, Vector eigenvalues,
                                  Matrix eigenvectors);

  double Value(const Vector& x) const { return QuadForm(metric, x - center); }
  bool Contains(const Vector& x) const { return Value(x) <= radius_sq; }
  Vector Project(const Vector& x) const;
};

// Constraints that can bind somewhere on K_eps. The rest hold on all of K_eps
// and are skipped by the solvers.
std::vector<const EllipsoidConstraint*> ActiveConstraints(const PositionedBody& pos,
                                                          const std::vector<EllipsoidConstraint>& constraints);

struct ProjectionOptions {
  double tol = 1e-8;
  int max_iter = 10000;
};

// Euclidean projection onto K_eps intersected with the constraints (Dykstra).
Vector ProjectIntersection(const Vector& x, const PositionedBody& pos,
                           const std::vector<EllipsoidConstraint>& constraints, ProjectionOptions opts = {});

struct SolveResult {
  Vector x;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  int floored = 0;  // eigenvalues raised by the floor
};

struct QuadraticSolveOptions {
  double tol = 1e-8;
  int max_iter = 50000;
  double eigen_floor = 0.0;
  std::optional<Vector> warm_start;
};

// argmin 1/2 x^T P x + b^T x over K_eps and the constraints.
SolveResult MinimizeQuadratic(const Matrix& P, const Vector& b, const PositionedBody& pos,
                              const std::vector<EllipsoidConstraint>& constraints, QuadraticSolveOptions opts = {});

// Value at x; writes the gradient.
using SmoothObjective = std::function<double(const Vector& x, Vector& grad)>;

struct SmoothSolveOptions {
  double tol = 1e-6;
  int max_iter = 20000;
  std::optional<Vector> start;
};

SolveResult MinimizeSmoothConvex(const SmoothObjective& f, const PositionedBody& pos,
                                 const std::vector<EllipsoidConstraint>& constraints, SmoothSolveOptions opts = {});

}  // namespace bco
