#pragma once

#include <functional>

#include "bco/linalg.hpp"

namespace bco {

// Sampling law N(mu, Sigma) with Sigma = covariance_factor covariance_factor^T
// and precision = Sigma^{-1}, plus the smoothing parameter lambda.
struct SurrogateParams {
  double lambda = 0.0;
  Vector mu;
  Matrix precision;
  Matrix covariance_factor;

  // Factor built from the eigendecomposition of the precision.
  static SurrogateParams FromPrecision(double lambda, Vector mu, const Matrix& precision);
  void Validate() const;
  int dimension() const { return static_cast<int>(mu.size()); }
  Matrix Covariance() const { return covariance_factor * covariance_factor.transpose(); }
};

struct SurrogateEstimate {
  double ratio = 0.0;
  double value = 0.0;
  Vector grad;
  Matrix hess;
};

double LogDensityRatio(const SurrogateParams& p, const Vector& X, const Vector& z);
// Throws RatioOverflow when log R > 700.
double DensityRatio(const SurrogateParams& p, const Vector& X, const Vector& z);

SurrogateEstimate Estimate(const SurrogateParams& p, const Vector& X, double Y, const Vector& z);

// One round's estimator kept as a function of z. With u = X - mu, e = z - mu
// and c = lambda / (1 - lambda), log R only needs P u, u^T P u, P e and e^T P e,
// which avoids the cancellation in the two-form expression when lambda is tiny.
class SurrogateTerm {
 public:
  SurrogateTerm(SurrogateParams params, Vector X, double Y);

  double Value(const Vector& z) const;
  double ValueAndGrad(const Vector& z, Vector& grad) const;
  const SurrogateParams& params() const { return params_; }
  const Vector& X() const { return X_; }
  double Y() const { return Y_; }

 private:
  // Writes P e into pe when non-null.
  double LogRatio(const Vector& z, Vector* pe) const;

  SurrogateParams params_;
  Vector X_;
  double Y_;
  double c_;
  double log_base_;
  Vector pu_;
  double upu_;
};

// <g, x - mu> + 1/4 ||x - mu||^2_H
double QuadSurrogateEval(const Vector& g, const Matrix& H, const Vector& mu, const Vector& x);

// f(x) = 1/2 x^T A x + b^T x + c
struct QuadraticLoss {
  Matrix A;
  Vector b;
  double c = 0.0;

  double operator()(const Vector& x) const { return 0.5 * QuadForm(A, x) + b.dot(x) + c; }
  // E f(N(m, S))
  double GaussianMean(const Vector& m, const Matrix& S) const;
};

struct ExactSurrogate {
  double value = 0.0;
  Vector grad;
  Matrix hess;
};

// s(z) = (1 - 1/lambda) E f(X) + (1/lambda) E f((1 - lambda) X + lambda z)
ExactSurrogate SExactQuadratic(const SurrogateParams& p, const QuadraticLoss& f, const Vector& z);

struct MonteCarloResult {
  double mean = 0.0;
  double std_error = 0.0;
};

MonteCarloResult SMonteCarlo(const SurrogateParams& p, const std::function<double(const Vector&)>& f,
                             const Vector& z, long n_samples, Rng& rng);

}  // namespace bco
