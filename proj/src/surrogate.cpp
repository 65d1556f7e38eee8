#include "bco/surrogate.hpp"

#include <cmath>

#include "bco/error.hpp"

namespace bco {

namespace {

constexpr double kMaxLogRatio = 700.0;

void CheckLambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw Error(ErrorKind::kInvalidInput, "lambda must lie in (0, 1)");
}

}  // namespace

SurrogateParams SurrogateParams::FromPrecision(double lambda, Vector mu, const Matrix& precision) {
  CheckLambda(lambda);
  SurrogateParams p;
  p.lambda = lambda;
  p.mu = std::move(mu);
  p.precision = Symmetrized(precision);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(p.precision);
  if (eig.eigenvalues().minCoeff() <= 0.0) throw Error(ErrorKind::kInvalidInput, "precision is not positive definite");
  p.covariance_factor =
      eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return p;
}

void SurrogateParams::Validate() const {
  CheckLambda(lambda);
  const auto d = mu.size();
  if (precision.rows() != d || precision.cols() != d || covariance_factor.rows() != d) {
    throw Error(ErrorKind::kInvalidInput, "surrogate params dimension mismatch");
  }
  if ((precision - precision.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, precision.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::kInvalidInput, "precision is not symmetric");
  }
}

namespace {

// log R = -d log(1 - lam) + 1/2 (||u||^2_P - ||w||^2_P) with u = X - mu and
// w = u + c (X - z); expanded so every term carries a factor of c.
double StableLogRatio(double lam, double upu, double u_pe, double epe, double d) {
  const double c = lam / (1.0 - lam);
  const double u_p_xz = upu - u_pe;                  // u^T P (X - z)
  const double xz_p_xz = upu - 2.0 * u_pe + epe;     // ||X - z||^2_P
  return -d * std::log1p(-lam) - c * u_p_xz - 0.5 * c * c * xz_p_xz;
}

}  // namespace

double LogDensityRatio(const SurrogateParams& p, const Vector& X, const Vector& z) {
  const Vector u = X - p.mu;
  const Vector e = z - p.mu;
  const Vector pe = p.precision * e;
  return StableLogRatio(p.lambda, QuadForm(p.precision, u), u.dot(pe), e.dot(pe), static_cast<double>(u.size()));
}

double DensityRatio(const SurrogateParams& p, const Vector& X, const Vector& z) {
  const double log_r = LogDensityRatio(p, X, z);
  if (log_r > kMaxLogRatio) throw RatioOverflow(log_r);
  return std::exp(log_r);
}

SurrogateEstimate Estimate(const SurrogateParams& p, const Vector& X, double Y, const Vector& z) {
  if (!std::isfinite(Y)) throw Error(ErrorKind::kInvalidInput, "Y is not finite");
  const double lam = p.lambda;
  const double log_r = LogDensityRatio(p, X, z);
  if (log_r > kMaxLogRatio) throw RatioOverflow(log_r);
  const double r = std::exp(log_r);

  const Vector w = (X - lam * z) / (1.0 - lam) - p.mu;
  const Vector pw = p.precision * w;
  SurrogateEstimate e;
  e.ratio = r;
  e.value = Y * (1.0 + std::expm1(log_r) / lam);
  e.grad = (Y * r / (1.0 - lam)) * pw;
  const double scale = lam * Y * r / ((1.0 - lam) * (1.0 - lam));
  e.hess = Symmetrized(scale * (pw * pw.transpose() - p.precision));
  return e;
}

SurrogateTerm::SurrogateTerm(SurrogateParams params, Vector X, double Y)
    : params_(std::move(params)), X_(std::move(X)), Y_(Y) {
  const double lam = params_.lambda;
  c_ = lam / (1.0 - lam);
  log_base_ = -static_cast<double>(X_.size()) * std::log1p(-lam);
  const Vector u = X_ - params_.mu;
  pu_ = params_.precision * u;
  upu_ = u.dot(pu_);
}

double SurrogateTerm::LogRatio(const Vector& z, Vector* pe) const {
  const Eigen::Index d = z.size();
  const Matrix& p = params_.precision;
  const double* mu = params_.mu.data();
  double u_pe = 0.0;
  double epe = 0.0;
  if (pe) pe->resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double row = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) row += p(i, j) * (z(i) - mu[i]);
    if (pe) (*pe)(j) = row;
    u_pe += pu_(j) * (z(j) - mu[j]);
    epe += row * (z(j) - mu[j]);
  }
  const double u_p_xz = upu_ - u_pe;
  const double xz_p_xz = upu_ - 2.0 * u_pe + epe;
  const double log_r = log_base_ - c_ * u_p_xz - 0.5 * c_ * c_ * xz_p_xz;
  if (log_r > kMaxLogRatio) throw RatioOverflow(log_r);
  return log_r;
}

double SurrogateTerm::Value(const Vector& z) const {
  if (Y_ == 0.0) return 0.0;
  return Y_ * (1.0 + std::expm1(LogRatio(z, nullptr)) / params_.lambda);
}

double SurrogateTerm::ValueAndGrad(const Vector& z, Vector& grad) const {
  if (Y_ == 0.0) {
    grad = Vector::Zero(z.size());
    return 0.0;
  }
  Vector pe;
  const double log_r = LogRatio(z, &pe);
  // P w = (1 + c) P u - c P e
  grad = (Y_ * std::exp(log_r) / (1.0 - params_.lambda)) * ((1.0 + c_) * pu_ - c_ * pe);
  return Y_ * (1.0 + std::expm1(log_r) / params_.lambda);
}

double QuadSurrogateEval(const Vector& g, const Matrix& H, const Vector& mu, const Vector& x) {
  const Vector dx = x - mu;
  return g.dot(dx) + 0.25 * QuadForm(H, dx);
}

double QuadraticLoss::GaussianMean(const Vector& m, const Matrix& S) const {
  return 0.5 * QuadForm(A, m) + 0.5 * (A * S).trace() + b.dot(m) + c;
}

ExactSurrogate SExactQuadratic(const SurrogateParams& p, const QuadraticLoss& f, const Vector& z) {
  if ((f.A - f.A.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorKind::kInvalidInput, "quadratic loss matrix is not symmetric");
  }
  const double lam = p.lambda;
  const Matrix sigma = p.Covariance();
  const Vector mz = (1.0 - lam) * p.mu + lam * z;
  ExactSurrogate s;
  s.value = (1.0 - 1.0 / lam) * f.GaussianMean(p.mu, sigma) +
            f.GaussianMean(mz, (1.0 - lam) * (1.0 - lam) * sigma) / lam;
  s.grad = f.A * mz + f.b;
  s.hess = lam * f.A;
  return s;
}

MonteCarloResult SMonteCarlo(const SurrogateParams& p, const std::function<double(const Vector&)>& f,
                             const Vector& z, long n_samples, Rng& rng) {
  if (n_samples <= 0) throw Error(ErrorKind::kInvalidInput, "n_samples must be positive");
  const double lam = p.lambda;
  const int d = p.dimension();
  double mean = 0.0;
  double m2 = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    const Vector x = p.mu + p.covariance_factor * StandardNormal(d, rng);
    const double sample = (1.0 - 1.0 / lam) * f(x) + f((1.0 - lam) * x + lam * z) / lam;
    const double delta = sample - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (sample - mean);
  }
  MonteCarloResult out;
  out.mean = mean;
  out.std_error = n_samples > 1 ? std::sqrt(m2 / (n_samples - 1.0) / n_samples) : 0.0;
  return out;
}

}  // namespace bco
