#include <cmath>
#include <memory>

#include "doctest.h"
#include "oracles.hpp"

#include "bco/error.hpp"
#include "bco/qp_solver.hpp"

using namespace bco;

namespace {

Vector V(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// The unit ball with a negligible shrink, so K_eps is the ball itself.
PositionedBody Ball(int d) { return PositionedBody::AsIs(BallBody::Unit(d), 1e-12); }

// Random ellipsoids that all contain x0 strictly inside.
std::vector<EllipsoidConstraint> ConstraintsThrough(const Vector& x0, int count, std::mt19937_64& rng) {
  const int d = static_cast<int>(x0.size());
  std::vector<EllipsoidConstraint> out;
  for (int i = 0; i < count; ++i) {
    const Vector center = oracle::InBall(d, 1.0, rng);
    const Matrix metric = oracle::SpdMatrix(d, 0.5, 8.0, rng);
    const double at_x0 = QuadForm(metric, x0 - center);
    out.push_back(EllipsoidConstraint::Make(center, metric, at_x0 * oracle::Uniform(1.2, 3.0, rng) + 0.05));
  }
  return out;
}

std::vector<oracle::Quadric> AsQuadrics(const std::vector<EllipsoidConstraint>& cs, int d, double ball_radius) {
  std::vector<oracle::Quadric> qs{{Vector::Zero(d), Matrix::Identity(d, d), ball_radius * ball_radius}};
  for (const auto& c : cs) qs.push_back({c.center, c.metric, c.radius_sq});
  return qs;
}

bool SatisfiesAll(const Vector& x, const std::vector<EllipsoidConstraint>& cs, double radius, double tol) {
  if (x.squaredNorm() > radius * radius + tol) return false;
  for (const auto& c : cs)
    if (c.Value(x) > c.radius_sq + tol) return false;
  return true;
}

}  // namespace

TEST_CASE("projection examples") {
  const auto pos = Ball(2);
  const Vector p = ProjectIntersection(V({2, 0}), pos, {});
  CHECK((p - V({1, 0})).norm() <= 1e-9);

  const Vector inside = V({0.1, -0.3});
  CHECK(ProjectIntersection(inside, pos, {}) == inside);

  std::vector<EllipsoidConstraint> half{EllipsoidConstraint::Make(Vector::Zero(2), 4.0 * Matrix::Identity(2, 2), 1.0)};
  CHECK((ProjectIntersection(V({2, 0}), pos, half) - V({0.5, 0})).norm() <= 1e-8);
}

TEST_CASE("projection onto random intersections matches the barrier oracle") {
  auto rng = oracle::MakeRng(1);
  for (int i = 0; i < 40; ++i) {
    const int d = 2 + i % 3;
    const Vector x0 = oracle::InBall(d, 0.6, rng);
    const auto cs = ConstraintsThrough(x0, 1 + i % 4, rng);
    const Vector x = oracle::Normal(d, rng) * 2.0;
    const Vector p = ProjectIntersection(x, Ball(d), cs);
    CHECK(SatisfiesAll(p, cs, 1.0, 1e-7));
    const Vector q = oracle::BarrierQp(Matrix::Identity(d, d), -x, AsQuadrics(cs, d, 1.0), x0);
    CHECK((p - q).norm() <= 1e-6);
  }
}

TEST_CASE("disjoint constraints are infeasible") {
  std::vector<EllipsoidConstraint> cs{
      EllipsoidConstraint::Make(V({0.5, 0}), Matrix::Identity(2, 2), 0.01),
      EllipsoidConstraint::Make(V({-0.5, 0}), Matrix::Identity(2, 2), 0.01),
  };
  try {
    ProjectIntersection(V({0, 1}), Ball(2), cs, ProjectionOptions{1e-8, 500});
    FAIL("expected infeasible");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInfeasible);
  }
}

TEST_CASE("membership-only bodies cannot be optimised over") {
  auto body = std::make_shared<MembershipBody>(
      2, [](const Vector& x) { return x.norm() <= 1.0; }, Vector::Zero(2));
  const auto pos = PositionedBody::AsIs(body, 0.1);
  try {
    MinimizeQuadratic(Matrix::Identity(2, 2), V({-2, 0}), pos, {});
    FAIL("expected unsupported body");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUnsupportedBody);
  }
}

TEST_CASE("minimize_quadratic examples") {
  const auto pos = Ball(2);
  const Matrix I = Matrix::Identity(2, 2);
  CHECK((MinimizeQuadratic(I, V({-2, 0}), pos, {}).x - V({1, 0})).norm() <= 1e-8);
  CHECK((MinimizeQuadratic(I, V({-0.1, 0}), pos, {}).x - V({0.1, 0})).norm() <= 1e-12);
  CHECK(MinimizeQuadratic(2.0 * I, Vector::Zero(2), pos, {}).x.norm() <= 1e-12);
}

TEST_CASE("eigenvalue floor") {
  Matrix P = Matrix::Identity(2, 2);
  P(1, 1) = -0.5;
  QuadraticSolveOptions opts;
  opts.eigen_floor = 1e-3;
  const SolveResult r = MinimizeQuadratic(P, V({-0.1, 0}), Ball(2), {}, opts);
  CHECK(r.floored == 1);
  CHECK(r.x.norm() <= 1.0 + 1e-9);
}

TEST_CASE("minimize_quadratic on random instances") {
  auto rng = oracle::MakeRng(2);
  for (int i = 0; i < 60; ++i) {
    const int d = 1 + i % 6;
    const Vector x0 = oracle::InBall(d, 0.6, rng);
    const auto cs = ConstraintsThrough(x0, i % 6, rng);
    const Matrix P = oracle::SpdMatrix(d, 0.05, 5.0, rng);
    const Vector b = oracle::Normal(d, rng) * 3.0;
    auto objective = [&](const Vector& x) { return 0.5 * QuadForm(P, x) + b.dot(x); };

    const Vector start = oracle::Normal(d, rng);
    QuadraticSolveOptions opts;
    opts.warm_start = start;
    const SolveResult r = MinimizeQuadratic(P, b, Ball(d), cs, opts);
    CHECK(r.converged);
    CHECK(SatisfiesAll(r.x, cs, 1.0, 1e-7));

    const Vector q = oracle::BarrierQp(P, b, AsQuadrics(cs, d, 1.0), x0);
    CHECK(std::abs(objective(r.x) - objective(q)) <= 1e-5);
    CHECK(objective(r.x) <= objective(ProjectIntersection(start, Ball(d), cs)) + 1e-12);
  }
}

TEST_CASE("minimize_quadratic in the plane against the grid oracle") {
  auto rng = oracle::MakeRng(3);
  for (int i = 0; i < 10; ++i) {
    const Vector x0 = oracle::InBall(2, 0.5, rng);
    const auto cs = ConstraintsThrough(x0, 1 + i % 5, rng);
    const Matrix P = oracle::SpdMatrix(2, 0.05, 5.0, rng);
    const Vector b = oracle::Normal(2, rng) * 3.0;
    auto objective = [&](const oracle::Vec& x) { return 0.5 * x.dot(P * x) + b.dot(x); };
    auto feasible = [&](const oracle::Vec& x) { return SatisfiesAll(x, cs, 1.0, 0.0); };
    const auto grid = oracle::GridMin2D(objective, feasible, 1.0);
    const SolveResult r = MinimizeQuadratic(P, b, Ball(2), cs);
    const Vector q = oracle::BarrierQp(P, b, AsQuadrics(cs, 2, 1.0), x0);
    INFO("solver ", r.value, " grid ", grid.second, " barrier ", objective(q), " x ", r.x.transpose(), " g ", grid.first.transpose());
    CHECK(std::abs(r.value - grid.second) <= 1e-5);
  }
}

TEST_CASE("minimize_smooth_convex examples") {
  const auto pos = Ball(2);
  SUBCASE("projection of an outside point") {
    const Vector a = V({3, 0});
    SmoothObjective f = [&](const Vector& x, Vector& g) {
      g = x - a;
      return 0.5 * (x - a).squaredNorm();
    };
    CHECK((MinimizeSmoothConvex(f, pos, {}).x - V({1, 0})).norm() <= 1e-6);
  }
  SUBCASE("two quadratics") {
    const Vector a = V({0.2, 0.1}), b = V({-0.4, 0.3});
    SmoothObjective f = [&](const Vector& x, Vector& g) {
      g = (x - a) + (x - b);
      return 0.5 * (x - a).squaredNorm() + 0.5 * (x - b).squaredNorm();
    };
    CHECK((MinimizeSmoothConvex(f, pos, {}).x - 0.5 * (a + b)).norm() <= 1e-6);
  }
  SUBCASE("linear") {
    const Vector c = V({1, -2});
    SmoothObjective f = [&](const Vector& x, Vector& g) {
      g = c;
      return c.dot(x);
    };
    CHECK((MinimizeSmoothConvex(f, pos, {}).x + c / c.norm()).norm() <= 1e-6);
  }
}

TEST_CASE("minimize_smooth_convex on random log-sum-exp objectives") {
  auto rng = oracle::MakeRng(4);
  for (int i = 0; i < 20; ++i) {
    const int d = 2;
    const Vector x0 = oracle::InBall(d, 0.5, rng);
    const auto cs = ConstraintsThrough(x0, i % 4, rng);
    Matrix a(4, d);
    for (int k = 0; k < 4; ++k) a.row(k) = oracle::Normal(d, rng).transpose() * 2.0;
    auto value = [a](const Vector& x) {
      const Vector s = a * x;
      const double m = s.maxCoeff();
      return m + std::log((s.array() - m).exp().sum()) + 0.1 * x.squaredNorm();
    };
    SmoothObjective f = [&](const Vector& x, Vector& g) {
      const Vector s = a * x;
      const Vector w = (s.array() - s.maxCoeff()).exp().matrix();
      g = a.transpose() * (w / w.sum()) + 0.2 * x;
      return value(x);
    };
    const SolveResult r = MinimizeSmoothConvex(f, Ball(d), cs);
    CHECK(SatisfiesAll(r.x, cs, 1.0, 1e-7));
    auto feasible = [&](const oracle::Vec& x) { return SatisfiesAll(x, cs, 1.0, 0.0); };
    const auto grid = oracle::GridMin2D(value, feasible, 1.0);
    CHECK(r.value <= grid.second + 1e-6);
  }
}
