#include "bco/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bco/error.hpp"

namespace bco {

namespace {

constexpr int kGaugeBisectionIterations = 60;
constexpr int kGaugeMaxIterations = 200;
constexpr double kGaugeTolerance = 1e-9;

void RequireFinite(const Vector& x, const char* what) {
  if (!x.allFinite()) throw Error(ErrorKind::kInvalidInput, std::string(what) + " has non-finite entries");
}

// sup{t >= 0 : x + t u in K} by doubling then bisection on the membership oracle.
double ChordExtent(const ConvexBody& body, const Vector& x, const Vector& u, Vector& buffer) {
  double lo = 0.0;
  double hi = 1.0;
  buffer.noalias() = x + hi * u;
  int doublings = 0;
  while (body.Contains(buffer)) {
    lo = hi;
    hi *= 2.0;
    buffer.noalias() = x + hi * u;
    if (++doublings > 80) throw Error(ErrorKind::kDegenerateBody, "hit-and-run chord is unbounded");
  }
  for (int i = 0; i < 80 && hi - lo > 1e-11 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    buffer.noalias() = x + mid * u;
    if (body.Contains(buffer)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::vector<Vector> BoxCorners(const Vector& lo, const Vector& hi) {
  std::vector<Vector> corners;
  const int d = static_cast<int>(lo.size());
  if (d > 16) return corners;
  const std::uint64_t count = std::uint64_t{1} << d;
  corners.reserve(count);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = (mask >> i) & 1 ? hi(i) : lo(i);
    corners.push_back(std::move(v));
  }
  return corners;
}

}  // namespace

AffineMap AffineMap::Identity(int d) {
  return AffineMap{Matrix::Identity(d, d), Matrix::Identity(d, d), Vector::Zero(d)};
}

AffineMap AffineMap::FromLinear(const Matrix& t, const Vector& c) {
  Eigen::FullPivLU<Matrix> lu(t);
  if (!lu.isInvertible()) throw Error(ErrorKind::kDegenerateBody, "affine map is singular");
  return AffineMap{t, lu.inverse(), c};
}

// ---------------------------------------------------------------------------
// ConvexBody defaults

Vector ConvexBody::Project(const Vector& /*x*/) const {
  throw Error(ErrorKind::kUnsupportedBody, Kind() + " body has no Euclidean projection");
}

double ConvexBody::Support(const Vector& /*c*/) const {
  throw Error(ErrorKind::kUnsupportedBody, Kind() + " body has no support function");
}

double ConvexBody::BoundingRadius() const {
  throw Error(ErrorKind::kUnsupportedBody, Kind() + " body has no bounding radius");
}

BodyPtr ConvexBody::Transformed(const AffineMap& map) const {
  // The closure owns the source body, so the image stays valid on its own.
  std::shared_ptr<const ConvexBody> self;
  try {
    self = shared_from_this();
  } catch (const std::bad_weak_ptr&) {
    throw Error(ErrorKind::kInvalidInput, "body must be owned by a shared_ptr to be transformed");
  }
  const AffineMap m = map;
  return std::make_shared<MembershipBody>(
      dimension(), [self, m](const Vector& y) { return self->Contains(m.Inverse(y)); }, m.Apply(InteriorPoint()));
}

MembershipBody::MembershipBody(int d, std::function<bool(const Vector&)> membership, Vector interior)
    : d_(d), membership_(std::move(membership)), interior_(std::move(interior)) {
  if (d_ <= 0) throw Error(ErrorKind::kInvalidInput, "dimension must be positive");
  if (interior_.size() != d_) throw Error(ErrorKind::kInvalidInput, "interior point has wrong dimension");
}

// ---------------------------------------------------------------------------
// Ellipsoid and ball

Vector ProjectOntoEllipsoid(const Vector& x, const Vector& center, const Vector& eigenvalues,
                            const Matrix& eigenvectors, double radius_sq) {
  const Vector u = eigenvectors.transpose() * (x - center);
  const Vector lam = eigenvalues.cwiseMax(0.0);
  const double value = (lam.array() * u.array().square()).sum();
  if (value <= radius_sq) return x;

  // h(nu) = sum lam u^2 / (1 + nu lam)^2 - r2 is convex and decreasing, so
  // Newton from nu = 0 approaches the root from the left without overshoot.
  double nu = 0.0;
  for (int it = 0; it < 200; ++it) {
    const Eigen::ArrayXd denom = 1.0 + nu * lam.array();
    const double h = (lam.array() * u.array().square() / denom.square()).sum() - radius_sq;
    if (h <= 1e-15 * radius_sq) break;
    const double dh = -2.0 * (lam.array().square() * u.array().square() / denom.cube()).sum();
    if (dh >= 0.0) break;
    const double step = -h / dh;
    nu += step;
    if (step <= 1e-17 * std::max(1.0, nu)) break;
  }
  Vector v = (u.array() / (1.0 + nu * lam.array())).matrix();
  const double final_value = (lam.array() * v.array().square()).sum();
  if (final_value > radius_sq) v *= std::sqrt(radius_sq / final_value);
  return center + eigenvectors * v;
}

EllipsoidBody::EllipsoidBody(Vector center, Matrix shape) : center_(std::move(center)), shape_(std::move(shape)) {
  const auto d = center_.size();
  if (d == 0 || shape_.rows() != d || shape_.cols() != d) {
    throw Error(ErrorKind::kInvalidInput, "ellipsoid shape/center dimension mismatch");
  }
  if (!center_.allFinite() || !shape_.allFinite()) throw Error(ErrorKind::kInvalidInput, "ellipsoid has non-finite data");
  if ((shape_ - shape_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, shape_.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::kInvalidInput, "ellipsoid shape is not symmetric");
  }
  shape_ = Symmetrized(shape_);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(shape_);
  eigenvalues_ = eig.eigenvalues();
  eigenvectors_ = eig.eigenvectors();
  if (eigenvalues_.minCoeff() <= 0.0) throw Error(ErrorKind::kDegenerateBody, "ellipsoid shape is not positive definite");
  shape_inv_ = eigenvectors_ * eigenvalues_.cwiseInverse().asDiagonal() * eigenvectors_.transpose();
}

bool EllipsoidBody::Contains(const Vector& x) const {
  const auto d = center_.size();
  double s = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double dj = x(j) - center_(j);
    double row = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) row += shape_(i, j) * (x(i) - center_(i));
    s += row * dj;
  }
  return s <= 1.0;
}

std::optional<double> EllipsoidBody::ExactGauge(const Vector& x) const {
  const double alpha = QuadForm(shape_, x);
  if (alpha == 0.0) return 0.0;
  const Vector am = shape_ * center_;
  const double beta = am.dot(x);
  const double gamma0 = center_.dot(am) - 1.0;
  if (gamma0 >= 0.0) return std::nullopt;  // origin not interior
  const double disc = std::sqrt(beta * beta - alpha * gamma0);
  if (beta >= 0.0) return alpha / (beta + disc);
  return (disc - beta) / (-gamma0);
}

Vector EllipsoidBody::Project(const Vector& x) const {
  return ProjectOntoEllipsoid(x, center_, eigenvalues_, eigenvectors_, 1.0);
}

double EllipsoidBody::Support(const Vector& c) const {
  return c.dot(center_) + std::sqrt(std::max(0.0, QuadForm(shape_inv_, c)));
}

double EllipsoidBody::BoundingRadius() const {
  return center_.norm() + 1.0 / std::sqrt(eigenvalues_.minCoeff());
}

BodyPtr EllipsoidBody::Transformed(const AffineMap& map) const {
  Matrix shape = map.T_inv.transpose() * shape_ * map.T_inv;
  return std::make_shared<EllipsoidBody>(map.Apply(center_), Symmetrized(shape));
}

BallBody::BallBody(Vector center, double radius)
    : EllipsoidBody(center, Matrix::Identity(center.size(), center.size()) / (radius * radius)), radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw Error(ErrorKind::kInvalidInput, "ball radius must be positive");
}

std::optional<double> BallBody::ExactGauge(const Vector& x) const {
  if (center_.isZero(0.0)) return x.norm() / radius_;
  return EllipsoidBody::ExactGauge(x);
}

Vector BallBody::Project(const Vector& x) const {
  const Vector diff = x - center_;
  const double norm = diff.norm();
  if (norm <= radius_) return x;
  return center_ + diff * (radius_ / norm);
}

// ---------------------------------------------------------------------------
// Polytopes

PolytopeBody::PolytopeBody(Matrix a, Vector b, std::optional<Vector> interior, std::vector<Vector> vertices)
    : a_(std::move(a)), b_(std::move(b)), interior_(std::move(interior)), vertices_(std::move(vertices)) {
  if (a_.rows() == 0 || a_.cols() == 0 || a_.rows() != b_.size()) {
    throw Error(ErrorKind::kInvalidInput, "polytope rows/offsets mismatch");
  }
  if (!a_.allFinite() || !b_.allFinite()) throw Error(ErrorKind::kInvalidInput, "polytope has non-finite data");
  row_norms_sq_ = a_.rowwise().squaredNorm();
  if (row_norms_sq_.minCoeff() <= 0.0) throw Error(ErrorKind::kInvalidInput, "polytope has a zero row");
}

bool PolytopeBody::Contains(const Vector& x) const {
  for (Eigen::Index i = 0; i < a_.rows(); ++i) {
    if (a_.row(i).dot(x) > b_(i)) return false;
  }
  return true;
}

Vector PolytopeBody::InteriorPoint() const {
  if (interior_) return *interior_;
  if (b_.minCoeff() > 0.0) return Vector::Zero(dimension());
  if (!vertices_.empty()) {
    Vector mean = Vector::Zero(dimension());
    for (const auto& v : vertices_) mean += v;
    return mean / static_cast<double>(vertices_.size());
  }
  throw Error(ErrorKind::kInvalidInput, "polytope needs an interior point");
}

std::optional<double> PolytopeBody::ExactGauge(const Vector& x) const {
  if (b_.minCoeff() <= 0.0) return std::nullopt;
  double g = 0.0;
  for (Eigen::Index i = 0; i < a_.rows(); ++i) g = std::max(g, a_.row(i).dot(x) / b_(i));
  return g;
}

Vector PolytopeBody::Project(const Vector& x) const {
  if (Contains(x)) return x;
  // Dykstra's alternating projection over the half-spaces.
  const Eigen::Index m = a_.rows();
  Matrix increments = Matrix::Zero(dimension(), m);
  Vector y = x;
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  for (int sweep = 0; sweep < 200000; ++sweep) {
    const Vector previous = y;
    for (Eigen::Index i = 0; i < m; ++i) {
      Vector z = y + increments.col(i);
      const double excess = a_.row(i).dot(z) - b_(i);
      Vector projected = z;
      if (excess > 0.0) projected -= (excess / row_norms_sq_(i)) * a_.row(i).transpose();
      increments.col(i) = z - projected;
      y = projected;
    }
    double violation = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      violation = std::max(violation, (a_.row(i).dot(y) - b_(i)) / std::sqrt(row_norms_sq_(i)));
    }
    if (violation <= 1e-13 * scale && (y - previous).norm() <= 1e-14 * scale) break;
  }
  return y;
}

double PolytopeBody::Support(const Vector& c) const {
  if (!vertices_.empty()) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices_) best = std::max(best, c.dot(v));
    return best;
  }
  // max <c, x> - ||x||^2 / (2 s) is attained by projecting s c; for large s
  // this recovers the support value up to R^2 / (2 s).
  const double norm = c.norm();
  if (norm == 0.0) return 0.0;
  const double s = 1e7 * std::max(1.0, b_.cwiseAbs().maxCoeff());
  const Vector x = Project(InteriorPoint() + (s / norm) * c);
  return c.dot(x);
}

double PolytopeBody::BoundingRadius() const {
  if (!vertices_.empty()) {
    double r = 0.0;
    for (const auto& v : vertices_) r = std::max(r, v.norm());
    return r;
  }
  const int d = dimension();
  double sq = 0.0;
  for (int i = 0; i < d; ++i) {
    const Vector e = Vector::Unit(d, i);
    const double extent = std::max(std::abs(Support(e)), std::abs(Support(-e)));
    sq += extent * extent;
  }
  return std::sqrt(sq) * (1.0 + 1e-9);
}

BodyPtr PolytopeBody::Transformed(const AffineMap& map) const {
  Matrix a = a_ * map.T_inv;
  Vector b = b_ - a_ * map.c;
  std::optional<Vector> interior;
  if (interior_) interior = map.Apply(*interior_);
  std::vector<Vector> vertices;
  vertices.reserve(vertices_.size());
  for (const auto& v : vertices_) vertices.push_back(map.Apply(v));
  if (!interior && b_.minCoeff() > 0.0) interior = map.Apply(Vector::Zero(dimension()));
  return std::make_shared<PolytopeBody>(std::move(a), std::move(b), std::move(interior), std::move(vertices));
}

namespace {

Matrix BoxRows(int d) {
  Matrix a(2 * d, d);
  a << Matrix::Identity(d, d), -Matrix::Identity(d, d);
  return a;
}

Vector BoxOffsets(const Vector& lo, const Vector& hi) {
  Vector b(2 * lo.size());
  b << hi, -lo;
  return b;
}

}  // namespace

BoxBody::BoxBody(Vector lo, Vector hi)
    : PolytopeBody(BoxRows(static_cast<int>(lo.size())), BoxOffsets(lo, hi), Vector(0.5 * (lo + hi)), BoxCorners(lo, hi)),
      lo_(std::move(lo)),
      hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) throw Error(ErrorKind::kInvalidInput, "box bounds dimension mismatch");
  if (((hi_ - lo_).array() <= 0.0).any()) throw Error(ErrorKind::kDegenerateBody, "box has empty interior");
}

bool BoxBody::Contains(const Vector& x) const {
  for (Eigen::Index i = 0; i < lo_.size(); ++i) {
    if (x(i) < lo_(i) || x(i) > hi_(i)) return false;
  }
  return true;
}

Vector BoxBody::Project(const Vector& x) const { return x.cwiseMax(lo_).cwiseMin(hi_); }

double BoxBody::Support(const Vector& c) const {
  return (c.array() * lo_.array()).max(c.array() * hi_.array()).sum();
}

namespace {

Matrix SimplexRows(int d) {
  Matrix a(d + 1, d);
  a << -Matrix::Identity(d, d), Matrix::Ones(1, d);
  return a;
}

Vector SimplexOffsets(int d, double scale) {
  Vector b = Vector::Zero(d + 1);
  b(d) = scale;
  return b;
}

std::vector<Vector> SimplexVertices(int d, double scale) {
  std::vector<Vector> v;
  v.push_back(Vector::Zero(d));
  for (int i = 0; i < d; ++i) v.push_back(scale * Vector::Unit(d, i));
  return v;
}

}  // namespace

SimplexBody::SimplexBody(int d, double scale)
    : PolytopeBody(SimplexRows(d), SimplexOffsets(d, scale), Vector(Vector::Constant(d, scale / (d + 1.0))),
                   SimplexVertices(d, scale)),
      scale_(scale) {
  if (!(scale > 0.0)) throw Error(ErrorKind::kInvalidInput, "simplex scale must be positive");
}

Vector SimplexBody::Project(const Vector& x) const {
  Vector clipped = x.cwiseMax(0.0);
  if (clipped.sum() <= scale_) return clipped;
  // Projection onto the face {x >= 0, sum x = scale}.
  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - scale_) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  return (x.array() - theta).cwiseMax(0.0).matrix();
}

// ---------------------------------------------------------------------------
// Positioned body

PositionedBody::PositionedBody(BodyPtr original, AffineMap map, double epsilon, double mean_width)
    : original_(std::move(original)), map_(std::move(map)), epsilon_(epsilon), mean_width_(mean_width) {
  if (!original_) throw Error(ErrorKind::kInvalidInput, "null body");
  const int d = original_->dimension();
  if (map_.T.rows() != d || map_.T.cols() != d || map_.c.size() != d) {
    throw Error(ErrorKind::kInvalidInput, "affine map dimension mismatch");
  }
  if (!(epsilon_ > 0.0 && epsilon_ < 0.5)) throw Error(ErrorKind::kInvalidInput, "epsilon must lie in (0, 1/2)");
  const double floor = 1.0 / std::sqrt(static_cast<double>(d));
  if (!(mean_width_ >= floor - 1e-12 && mean_width_ <= 1.0 + 1e-9)) {
    throw Error(ErrorKind::kInvalidInput, "mean width M must lie in [d^{-1/2}, 1]");
  }
  const bool identity = map_.T.isIdentity(0.0) && map_.c.isZero(0.0);
  positioned_ = identity ? original_ : original_->Transformed(map_);
}

PositionedBody PositionedBody::AsIs(BodyPtr body, double epsilon, double mean_width) {
  const int d = body->dimension();
  return PositionedBody(std::move(body), AffineMap::Identity(d), epsilon, mean_width);
}

PositionedBody PositionedBody::WithEpsilon(double epsilon) const {
  PositionedBody copy = *this;
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw Error(ErrorKind::kInvalidInput, "epsilon must lie in (0, 1/2)");
  copy.epsilon_ = epsilon;
  return copy;
}

PositionedBody PositionedBody::WithMeanWidth(double mean_width) const {
  PositionedBody copy = *this;
  const double floor = 1.0 / std::sqrt(static_cast<double>(dimension()));
  if (!(mean_width >= floor - 1e-12 && mean_width <= 1.0 + 1e-9)) {
    throw Error(ErrorKind::kInvalidInput, "mean width M must lie in [d^{-1/2}, 1]");
  }
  copy.mean_width_ = mean_width;
  return copy;
}

bool PositionedBody::InShrunkBody(const Vector& y, double inflation) const {
  return positioned_->Contains(y / ((1.0 - epsilon_) * (1.0 + inflation)));
}

Vector PositionedBody::ProjectShrunk(const Vector& y) const {
  const double s = 1.0 - epsilon_;
  return s * positioned_->Project(y / s);
}

double PositionedBody::ShrunkBoundingRadius() const { return (1.0 - epsilon_) * positioned_->BoundingRadius(); }

// ---------------------------------------------------------------------------
// Gauge and radial projection

double GaugeBisection(const ConvexBody& body, const Vector& x) {
  RequireFinite(x, "gauge argument");
  const double norm = x.norm();
  if (norm == 0.0) return 0.0;
  const int d = body.dimension();
  double lo = norm / (2.0 * (d + 1.0));
  // Slightly above ||x|| so a body touching the unit sphere still brackets.
  double hi = norm * (1.0 + 1e-12);
  if (!body.Contains(x / hi)) {
    throw Error(ErrorKind::kPositioningViolation, "unit ball not contained in body (gauge bracket invalid)");
  }
  for (int i = 0; i < kGaugeMaxIterations; ++i) {
    if (i >= kGaugeBisectionIterations && hi - lo <= kGaugeTolerance * std::max(1.0, hi) * 1e-3) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (body.Contains(x / mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double Gauge(const ConvexBody& body, const Vector& x) {
  RequireFinite(x, "gauge argument");
  if (x.isZero(0.0)) return 0.0;
  if (auto exact = body.ExactGauge(x)) return *exact;
  return GaugeBisection(body, x);
}

double Pip(const PositionedBody& pos, const Vector& x) {
  return std::max(1.0, Gauge(pos.body(), x) / (1.0 - pos.epsilon()));
}

Vector RadialProject(const PositionedBody& pos, const Vector& x) { return x / Pip(pos, x); }

// ---------------------------------------------------------------------------
// Sampling and positioning

Vector HitAndRunSample(const ConvexBody& body, const Vector& start, int burn_in, Rng& rng) {
  RequireFinite(start, "hit-and-run start");
  if (start.size() != body.dimension()) throw Error(ErrorKind::kInvalidInput, "start point has wrong dimension");
  if (!body.Contains(start)) throw Error(ErrorKind::kInvalidInput, "hit-and-run start is not in the body");
  if (burn_in < 0) throw Error(ErrorKind::kInvalidInput, "burn_in must be non-negative");
  const int d = body.dimension();
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vector x = start;
  Vector buffer(d);
  for (int step = 0; step < burn_in; ++step) {
    const Vector u = RandomUnitVector(d, rng);
    const double forward = ChordExtent(body, x, u, buffer);
    const double backward = ChordExtent(body, x, -u, buffer);
    const double t = -backward + (forward + backward) * uniform(rng);
    x += t * u;
  }
  return x;
}

PositionedBody PositionIsotropic(BodyPtr body, int n_samples, Rng& rng, int burn_in) {
  if (!body) throw Error(ErrorKind::kInvalidInput, "null body");
  const int d = body->dimension();
  if (n_samples <= 0) n_samples = 50 * d * d;
  if (burn_in <= 0) burn_in = 30 * d;
  if (n_samples < d + 1) throw Error(ErrorKind::kInvalidInput, "too few samples for a covariance estimate");

  Vector x = HitAndRunSample(*body, body->InteriorPoint(), 10 * burn_in, rng);
  Matrix samples(d, n_samples);
  for (int i = 0; i < n_samples; ++i) {
    x = HitAndRunSample(*body, x, burn_in, rng);
    samples.col(i) = x;
  }
  const Vector mean = samples.rowwise().mean();
  const Matrix centered = samples.colwise() - mean;
  const Matrix cov = Symmetrized(centered * centered.transpose() / (n_samples - 1.0));

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Vector lam = eig.eigenvalues();
  if (lam.minCoeff() < 1e-10 * lam.maxCoeff() || lam.maxCoeff() <= 0.0) {
    throw Error(ErrorKind::kDegenerateBody, "sample covariance is singular");
  }
  const Matrix& q = eig.eigenvectors();
  const Matrix t = q * lam.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
  const Matrix t_inv = q * lam.cwiseSqrt().asDiagonal() * q.transpose();
  AffineMap map{t, t_inv, mean};

  PositionedBody pos(body, map, 0.1, 1.0);
  pos.report.samples = n_samples;

  for (int i = 0; i < 100; ++i) {
    const Vector u = RandomUnitVector(d, rng);
    try {
      if (Gauge(pos.body(), u) > 1.0 + 1e-12) ++pos.report.inner_ball_violations;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kPositioningViolation) throw;
      ++pos.report.inner_ball_violations;
    }
  }

  // Held-out chain segment to log how isotropic the result is.
  const int n_check = std::max(d + 1, n_samples / 4);
  Matrix check(d, n_check);
  for (int i = 0; i < n_check; ++i) {
    x = HitAndRunSample(*body, x, burn_in, rng);
    check.col(i) = map.Apply(x);
  }
  const Vector check_mean = check.rowwise().mean();
  const Matrix check_centered = check.colwise() - check_mean;
  const Matrix check_cov = check_centered * check_centered.transpose() / (n_check - 1.0);
  pos.report.covariance_deviation = (check_cov - Matrix::Identity(d, d)).norm();
  return pos;
}

double EstimateMeanWidth(const PositionedBody& pos, int n_dirs, Rng& rng) {
  if (n_dirs <= 0) throw Error(ErrorKind::kInvalidInput, "n_dirs must be positive");
  const int d = pos.dimension();
  double total = 0.0;
  for (int i = 0; i < n_dirs; ++i) total += Gauge(pos.body(), RandomUnitVector(d, rng));
  return std::max(1.0 / std::sqrt(static_cast<double>(d)), total / n_dirs);
}

}  // namespace bco
