#include "bco/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

#include "bco/geometry.hpp"
#include "bco/qp_solver.hpp"
#include "bco/surrogate.hpp"

namespace bco {

namespace {

std::string Format(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c);
  return buf;
}

// Running mean and variance (Welford).
struct Moments {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void Add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  double StdError() const { return n > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0; }
};

Matrix GaussianMatrix(int rows, int cols, double scale, Rng& rng) {
  std::normal_distribution<double> normal(0.0, scale);
  return Matrix::NullaryExpr(rows, cols, [&] { return normal(rng); });
}

}  // namespace

DiagReport DiagGauge(std::uint64_t seed, int points) {
  DiagReport report{"gauge", true, {}};
  Rng rng(seed);
  Matrix shape(2, 2);
  shape << 1.0, 0.0, 0.0, 0.25;
  const std::vector<std::pair<std::string, BodyPtr>> bodies = {
      {"ball d=3", BallBody::Unit(3)},
      {"ellipsoid d=2", std::make_shared<EllipsoidBody>(Vector::Zero(2), shape)},
      {"box d=2", std::make_shared<BoxBody>(Vector::Constant(2, -1.0), Vector::Constant(2, 1.5))},
  };
  std::uniform_real_distribution<double> uniform(0.0, 5.0);
  for (const auto& [name, body] : bodies) {
    const int d = body->dimension();
    double exact_gap = 0.0;
    double homogeneity_gap = 0.0;
    double subadditivity_excess = 0.0;
    for (int i = 0; i < points; ++i) {
      const Vector x = 2.0 * StandardNormal(d, rng);
      const Vector y = 2.0 * StandardNormal(d, rng);
      const double t = uniform(rng);
      const double gx = Gauge(*body, x);
      exact_gap = std::max(exact_gap, std::abs(gx - GaugeBisection(*body, x)));
      homogeneity_gap = std::max(homogeneity_gap, std::abs(Gauge(*body, t * x) - t * gx));
      subadditivity_excess = std::max(subadditivity_excess, Gauge(*body, x + y) - gx - Gauge(*body, y));
    }
    const bool ok = exact_gap <= 1e-9 && homogeneity_gap <= 1e-8 && subadditivity_excess <= 1e-8;
    report.passed = report.passed && ok;
    report.lines.push_back(name + Format(": bisection gap %.3g, homogeneity gap %.3g, subadditivity excess %.3g",
                                         exact_gap, homogeneity_gap, subadditivity_excess) +
                           (ok ? "" : "  FAIL"));
  }
  return report;
}

DiagReport DiagUnbiasedness(std::uint64_t seed, long draws) {
  DiagReport report{"unbiasedness", true, {}};
  Rng rng(seed);
  const int d = 3;
  const Matrix root = GaussianMatrix(d, d, 0.5, rng);
  const Matrix precision = root * root.transpose() + Matrix::Identity(d, d);
  const SurrogateParams p = SurrogateParams::FromPrecision(0.05, Vector::Constant(d, 0.1), precision);
  const Matrix a_root = GaussianMatrix(d, d, 0.5, rng);
  QuadraticLoss f{a_root * a_root.transpose(), Vector::LinSpaced(d, -0.5, 0.5), 0.3};
  const Vector z = Vector::LinSpaced(d, 0.2, -0.1);
  const ExactSurrogate exact = SExactQuadratic(p, f, z);

  Moments value;
  std::vector<Moments> grad(d);
  std::vector<Moments> hess(d * d);
  for (long i = 0; i < draws; ++i) {
    const Vector X = p.mu + p.covariance_factor * StandardNormal(d, rng);
    const SurrogateEstimate e = Estimate(p, X, f(X), z);
    value.Add(e.value);
    for (int r = 0; r < d; ++r) {
      grad[r].Add(e.grad(r));
      for (int c = 0; c < d; ++c) hess[r * d + c].Add(e.hess(r, c));
    }
  }
  double worst = std::abs(value.mean - exact.value) / value.StdError();
  for (int r = 0; r < d; ++r) {
    worst = std::max(worst, std::abs(grad[r].mean - exact.grad(r)) / grad[r].StdError());
    for (int c = 0; c < d; ++c) {
      worst = std::max(worst, std::abs(hess[r * d + c].mean - exact.hess(r, c)) / hess[r * d + c].StdError());
    }
  }
  report.passed = worst <= 4.0;
  report.lines.push_back(Format("value: estimate %.6f vs exact %.6f", value.mean, exact.value));
  report.lines.push_back(Format("largest deviation over value, gradient and Hessian entries: %.2f standard errors",
                                worst));
  return report;
}

DiagReport DiagFtrl(std::uint64_t seed, int instances, int rounds) {
  DiagReport report{"ftrl", true, {}};
  Rng rng(seed);
  const int d = 3;
  const double sigma_sq = 1.0;
  const double eta = 0.1;
  const PositionedBody pos = PositionedBody::AsIs(BallBody::Unit(d), 0.1);
  int violations = 0;
  double tightest = -1e300;
  for (int inst = 0; inst < instances; ++inst) {
    std::vector<Vector> g(rounds);
    std::vector<Matrix> h(rounds);
    for (int t = 0; t < rounds; ++t) {
      g[t] = StandardNormal(d, rng);
      const Matrix root = GaussianMatrix(d, d, 0.3, rng);
      h[t] = root * root.transpose();
    }
    Matrix P = Matrix::Identity(d, d) / sigma_sq;
    Vector b = Vector::Zero(d);
    std::vector<Vector> xs;
    double dual_sum = 0.0;
    for (int t = 0; t < rounds; ++t) {
      QuadraticSolveOptions opts;
      opts.tol = 1e-12;
      const Vector x = MinimizeQuadratic(P, b, pos, {}, opts).x;
      xs.push_back(x);
      P += eta * h[t];
      b += eta * g[t];
      const Vector grad = g[t] + h[t] * x;
      dual_sum += grad.dot(P.ldlt().solve(grad));
    }
    for (int k = 0; k < 100; ++k) {
      const Vector x = pos.ProjectShrunk(1.5 * StandardNormal(d, rng));
      double lhs = 0.0;
      for (int t = 0; t < rounds; ++t) {
        auto fhat = [&](const Vector& y) { return g[t].dot(y) + 0.5 * QuadForm(h[t], y); };
        lhs += eta * (fhat(xs[t]) - fhat(x));
      }
      const double rhs = x.squaredNorm() / (2.0 * sigma_sq) + 2.0 * eta * eta * dual_sum;
      tightest = std::max(tightest, lhs - rhs);
      if (lhs > rhs + 1e-6) ++violations;
    }
  }
  report.passed = violations == 0;
  report.lines.push_back(Format("%.0f violations over %.0f comparisons; largest lhs - rhs %.4g", violations,
                                instances * 100.0, tightest));
  return report;
}

}  // namespace bco
