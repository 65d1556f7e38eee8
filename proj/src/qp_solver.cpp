#include "bco/qp_solver.hpp"

#include <algorithm>
#include <cmath>

#include "bco/error.hpp"

namespace bco {

EllipsoidConstraint EllipsoidConstraint::Make(Vector center, const Matrix& metric, double radius_sq) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Symmetrized(metric));
  return Make(std::move(center), Symmetrized(metric), radius_sq, eig.eigenvalues(), eig.eigenvectors());
}

EllipsoidConstraint EllipsoidConstraint::Make(Vector center, Matrix metric, double radius_sq, Vector eigenvalues,
                                              Matrix eigenvectors) {
  if (!(radius_sq > 0.0)) throw Error(ErrorKind::kInvalidInput, "constraint radius must be positive");
  if (eigenvalues.minCoeff() < -1e-10 * std::max(1.0, eigenvalues.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::kInvalidInput, "constraint metric is not PSD");
  }
  EllipsoidConstraint c;
  c.center = std::move(center);
  c.metric = std::move(metric);
  c.radius_sq = radius_sq;
  c.eigenvalues = std::move(eigenvalues);
  c.eigenvectors = std::move(eigenvectors);
  return c;
}

Vector EllipsoidConstraint::Project(const Vector& x) const {
  return ProjectOntoEllipsoid(x, center, eigenvalues, eigenvectors, radius_sq);
}

std::vector<const EllipsoidConstraint*> ActiveConstraints(const PositionedBody& pos,
                                                          const std::vector<EllipsoidConstraint>& constraints) {
  std::vector<const EllipsoidConstraint*> active;
  if (constraints.empty()) return active;
  const double r = pos.ShrunkBoundingRadius();
  for (const auto& c : constraints) {
    const double reach = r + c.center.norm();
    if (c.eigenvalues.maxCoeff() * reach * reach > c.radius_sq) active.push_back(&c);
  }
  return active;
}

namespace {

void RequireProjection(const PositionedBody& pos) {
  if (!pos.body().HasProjection()) {
    throw Error(ErrorKind::kUnsupportedBody, pos.body().Kind() + " body cannot be used as a feasible set");
  }
}

bool Feasible(const Vector& x, const PositionedBody& pos, const std::vector<const EllipsoidConstraint*>& active) {
  if (!pos.InShrunkBody(x, 0.0)) return false;
  for (const auto* c : active) {
    if (!c->Contains(x)) return false;
  }
  return true;
}

Vector ProjectActive(const Vector& x, const PositionedBody& pos,
                     const std::vector<const EllipsoidConstraint*>& active, const ProjectionOptions& opts) {
  if (Feasible(x, pos, active)) return x;
  if (active.empty()) return pos.ProjectShrunk(x);

  // Dykstra with K_eps last so the output lies exactly in K_eps.
  const std::size_t m = active.size() + 1;
  std::vector<Vector> increments(m, Vector::Zero(x.size()));
  auto project = [&](std::size_t k, const Vector& z) {
    return k < active.size() ? active[k]->Project(z) : pos.ProjectShrunk(z);
  };
  Vector y = x;
  double violation = 0.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    const Vector previous = y;
    for (std::size_t k = 0; k < m; ++k) {
      const Vector z = y + increments[k];
      y = project(k, z);
      increments[k] = z - y;
    }
    violation = 0.0;
    for (std::size_t k = 0; k + 1 < m; ++k) violation = std::max(violation, (y - project(k, y)).norm());
    if (violation <= opts.tol && (y - previous).norm() <= opts.tol) return y;
  }
  if (violation <= opts.tol) return y;
  throw Error(ErrorKind::kInfeasible, "alternating projection did not reach a feasible point (violation " +
                                          std::to_string(violation) + ")");
}

}  // namespace

Vector ProjectIntersection(const Vector& x, const PositionedBody& pos,
                           const std::vector<EllipsoidConstraint>& constraints, ProjectionOptions opts) {
  RequireProjection(pos);
  if (!x.allFinite()) throw Error(ErrorKind::kInvalidInput, "projection argument is not finite");
  return ProjectActive(x, pos, ActiveConstraints(pos, constraints), opts);
}

SolveResult MinimizeQuadratic(const Matrix& P, const Vector& b, const PositionedBody& pos,
                              const std::vector<EllipsoidConstraint>& constraints, QuadraticSolveOptions opts) {
  RequireProjection(pos);
  const FlooredMatrix fl = FloorEigenvalues(P, opts.eigen_floor);
  const Matrix& pm = fl.matrix;
  const double lmax = fl.eigenvalues.maxCoeff();
  const double lmin = fl.eigenvalues.minCoeff();
  if (!(lmax > 0.0)) throw Error(ErrorKind::kInternal, "quadratic has no positive curvature");
  const auto active = ActiveConstraints(pos, constraints);
  const ProjectionOptions popts;
  auto objective = [&](const Vector& x) { return 0.5 * QuadForm(pm, x) + b.dot(x); };

  SolveResult out;
  out.floored = fl.raised;
  if (lmin > 0.0) {
    const Vector unconstrained =
        -(fl.eigenvectors * (fl.eigenvectors.transpose() * b).cwiseQuotient(fl.eigenvalues));
    if (Feasible(unconstrained, pos, active)) {
      out.x = unconstrained;
      out.value = objective(unconstrained);
      out.converged = true;
      return out;
    }
  }

  Vector x = ProjectActive(opts.warm_start ? *opts.warm_start : Vector(Vector::Zero(b.size())), pos, active, popts);
  for (int it = 0; it < opts.max_iter; ++it) {
    const Vector px = pm * x;
    const Vector grad = px + b;
    const Vector next = ProjectActive(x - grad / lmax, pos, active, popts);
    const double mapping = lmax * (x - next).norm();
    x = next;
    out.iterations = it + 1;
    if (mapping <= opts.tol * std::max(1.0, px.norm() + b.norm())) {
      out.converged = true;
      break;
    }
  }
  out.x = x;
  out.value = objective(x);
  return out;
}

SolveResult MinimizeSmoothConvex(const SmoothObjective& f, const PositionedBody& pos,
                                 const std::vector<EllipsoidConstraint>& constraints, SmoothSolveOptions opts) {
  RequireProjection(pos);
  const auto active = ActiveConstraints(pos, constraints);
  const ProjectionOptions popts;
  const int d = pos.dimension();
  Vector x = ProjectActive(opts.start ? *opts.start : Vector(Vector::Zero(d)), pos, active, popts);
  Vector grad(d);
  Vector trial_grad(d);
  double value = f(x, grad);
  double step = 1.0;
  SolveResult out;
  for (int it = 0; it < opts.max_iter; ++it) {
    out.iterations = it;
    const double mapping = (x - ProjectActive(x - grad, pos, active, popts)).norm();
    if (mapping <= opts.tol) {
      out.converged = true;
      break;
    }
    step = std::min(step * 2.0, 1e12);
    bool accepted = false;
    while (step > 1e-30) {
      const Vector trial = ProjectActive(x - step * grad, pos, active, popts);
      const double trial_value = f(trial, trial_grad);
      if (trial_value <= value + 1e-4 * grad.dot(trial - x)) {
        accepted = (trial - x).norm() > 0.0;
        x = trial;
        value = trial_value;
        grad = trial_grad;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no representable decrease left
  }
  out.x = x;
  out.value = value;
  return out;
}

}  // namespace bco
