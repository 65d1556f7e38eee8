#include "bco/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bco/error.hpp"

namespace bco {

NoiseModel NoiseModel::Gaussian(double std) {
  NoiseModel n{Kind::kGaussian, std};
  n.Validate();
  return n;
}

NoiseModel NoiseModel::Uniform(double half_width) {
  NoiseModel n{Kind::kUniform, half_width};
  n.Validate();
  return n;
}

void NoiseModel::Validate() const {
  switch (kind) {
    case Kind::kNone:
      return;
    case Kind::kGaussian:
      // E exp(eps^2) = 1 / sqrt(1 - 2 s^2) <= 2 needs s^2 <= 3/8.
      if (!(scale >= 0.0 && scale <= std::sqrt(3.0 / 8.0))) {
        throw Error(ErrorKind::kInvalidInput, "gaussian noise std must lie in [0, sqrt(3/8)]");
      }
      return;
    case Kind::kUniform:
      if (!(scale >= 0.0 && scale <= 0.8)) throw Error(ErrorKind::kInvalidInput, "uniform half width must lie in [0, 0.8]");
      return;
  }
}

double NoiseModel::Sample(Rng& rng) const {
  switch (kind) {
    case Kind::kNone:
      return 0.0;
    case Kind::kGaussian:
      return std::normal_distribution<double>(0.0, scale)(rng);
    case Kind::kUniform:
      return std::uniform_real_distribution<double>(-scale, scale)(rng);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Test losses

namespace {

class QuadraticLossFn : public LossFunction {
 public:
  QuadraticLossFn(Vector center, double coeff) : center_(std::move(center)), coeff_(coeff) {}
  double Value(const Vector& x) const override { return coeff_ * (x - center_).squaredNorm(); }
  Vector Subgradient(const Vector& x) const override { return 2.0 * coeff_ * (x - center_); }
  std::optional<std::pair<Vector, double>> IsotropicQuadratic() const override {
    return std::make_pair(center_, coeff_);
  }

 private:
  Vector center_;
  double coeff_;
};

class MaxAffineLossFn : public LossFunction {
 public:
  MaxAffineLossFn(Matrix slopes, Vector offsets, double lo, double hi)
      : slopes_(std::move(slopes)), offsets_(std::move(offsets)), lo_(lo), width_(hi - lo) {}

  double Value(const Vector& x) const override {
    Eigen::Index i = 0;
    return Clamp01(((slopes_ * x + offsets_).maxCoeff(&i) - lo_) / width_);
  }
  Vector Subgradient(const Vector& x) const override {
    Eigen::Index i = 0;
    (slopes_ * x + offsets_).maxCoeff(&i);
    return slopes_.row(i).transpose() / width_;
  }

 private:
  // Support values are exact, so this only absorbs rounding at the boundary.
  static double Clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

  Matrix slopes_;
  Vector offsets_;
  double lo_;
  double width_;
};

class LovaszLossFn : public LossFunction {
 public:
  LovaszLossFn(SetFunction f, int d, double lo, double hi) : f_(std::move(f)), d_(d), lo_(lo), width_(hi - lo) {}

  double Value(const Vector& x) const override { return (LovaszExtension(f_, d_, Clip(x)) - lo_) / width_; }
  Vector Subgradient(const Vector& x) const override { return LovaszSubgradient(f_, d_, Clip(x)) / width_; }

 private:
  Vector Clip(const Vector& x) const {
    if ((x.array() < -1e-9).any() || (x.array() > 1.0 + 1e-9).any()) {
      throw Error(ErrorKind::kInvalidInput, "Lovasz loss evaluated outside [0, 1]^d");
    }
    return x.cwiseMax(0.0).cwiseMin(1.0);
  }

  SetFunction f_;
  int d_;
  double lo_;
  double width_;
};

std::vector<int> DescendingOrder(const Vector& x) {
  std::vector<int> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x(a) > x(b); });
  return order;
}

void CheckGround(int d) {
  if (d < 1 || d > 30) throw Error(ErrorKind::kInvalidInput, "ground set size must lie in [1, 30]");
}

}  // namespace

double FarthestDistance(const ConvexBody& body, const Vector& a) {
  if (const auto* ell = dynamic_cast<const EllipsoidBody*>(&body)) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(ell->shape(), Eigen::EigenvaluesOnly);
    return (a - ell->center()).norm() + 1.0 / std::sqrt(eig.eigenvalues().minCoeff());
  }
  if (const auto* box = dynamic_cast<const BoxBody*>(&body)) {
    return (a - box->lo()).cwiseAbs().cwiseMax((a - box->hi()).cwiseAbs()).norm();
  }
  return body.BoundingRadius() + a.norm();
}

LossPtr MakeQuadratic(const ConvexBody& body, const Vector& center, double scale) {
  if (center.size() != body.dimension()) throw Error(ErrorKind::kInvalidInput, "quadratic center has wrong dimension");
  if (!(scale > 0.0 && scale <= 1.0)) throw Error(ErrorKind::kInvalidInput, "quadratic scale must lie in (0, 1]");
  const double reach = FarthestDistance(body, center);
  if (!(reach > 0.0)) throw Error(ErrorKind::kInvalidInput, "degenerate quadratic normalizer");
  return std::make_shared<QuadraticLossFn>(center, scale / (reach * reach));
}

LossPtr MakeLinear(const ConvexBody& body, const Vector& c) {
  return MakeMaxLinear(body, c.transpose(), Vector::Zero(1));
}

LossPtr MakeMaxLinear(const ConvexBody& body, const Matrix& slopes, const Vector& offsets) {
  if (slopes.rows() == 0 || slopes.rows() != offsets.size() || slopes.cols() != body.dimension()) {
    throw Error(ErrorKind::kInvalidInput, "affine pieces have inconsistent shapes");
  }
  double lo = -std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < slopes.rows(); ++i) {
    const Vector c = slopes.row(i).transpose();
    lo = std::max(lo, offsets(i) - body.Support(-c));
    hi = std::max(hi, offsets(i) + body.Support(c));
  }
  if (!(hi - lo > 1e-12)) throw Error(ErrorKind::kInvalidInput, "affine pieces are constant on the body");
  return std::make_shared<MaxAffineLossFn>(slopes, offsets, lo, hi);
}

double LovaszExtension(const SetFunction& F, int d, const Vector& x) {
  CheckGround(d);
  if (x.size() != d) throw Error(ErrorKind::kInvalidInput, "Lovasz argument has wrong dimension");
  if ((x.array() < -1e-9).any() || (x.array() > 1.0 + 1e-9).any()) {
    throw Error(ErrorKind::kInvalidInput, "Lovasz argument outside [0, 1]^d");
  }
  double value = 0.0;
  std::uint32_t set = 0;
  double previous = F(0);
  for (int i : DescendingOrder(x)) {
    set |= std::uint32_t{1} << i;
    const double current = F(set);
    value += x(i) * (current - previous);
    previous = current;
  }
  return value;
}

Vector LovaszSubgradient(const SetFunction& F, int d, const Vector& x) {
  CheckGround(d);
  Vector g(d);
  std::uint32_t set = 0;
  double previous = F(0);
  for (int i : DescendingOrder(x)) {
    set |= std::uint32_t{1} << i;
    const double current = F(set);
    g(i) = current - previous;
    previous = current;
  }
  return g;
}

bool IsSubmodular(const SetFunction& F, int d, double tol) {
  CheckGround(d);
  const std::uint32_t count = std::uint32_t{1} << d;
  for (std::uint32_t s = 0; s < count; ++s) {
    for (std::uint32_t t = 0; t < count; ++t) {
      if (F(s & t) + F(s | t) > F(s) + F(t) + tol) return false;
    }
  }
  return true;
}

double CutFunction::Raw(std::uint32_t mask) const {
  auto in = [mask](int i) { return (mask >> i) & 1u; };
  double value = 0.0;
  for (const auto& e : edges) {
    if (in(e.u) != in(e.v)) value += e.weight;
  }
  for (int i = 0; i < d; ++i) {
    if (in(i)) {
      if (sink.size() == d) value += sink(i);
    } else if (source.size() == d) {
      value += source(i);
    }
  }
  return value;
}

double CutFunction::operator()(std::uint32_t mask) const { return Raw(mask) - Raw(0); }

SetMinimum BruteForceMinimum(const SetFunction& F, int d) {
  CheckGround(d);
  SetMinimum out;
  out.value = F(0);
  out.max_value = out.value;
  const std::uint32_t count = std::uint32_t{1} << d;
  for (std::uint32_t s = 1; s < count; ++s) {
    const double v = F(s);
    if (v < out.value) {
      out.value = v;
      out.mask = s;
    }
    out.max_value = std::max(out.max_value, v);
  }
  return out;
}

LossPtr MakeLovaszLoss(SetFunction F, int d) {
  if (F(0) != 0.0) throw Error(ErrorKind::kInvalidInput, "set function must vanish on the empty set");
  const SetMinimum range = BruteForceMinimum(F, d);
  if (!(range.max_value - range.value > 1e-12)) throw Error(ErrorKind::kInvalidInput, "set function is constant");
  return std::make_shared<LovaszLossFn>(std::move(F), d, range.value, range.max_value);
}

std::uint32_t RoundToSet(const Vector& x, double theta) {
  std::uint32_t mask = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) >= theta) mask |= std::uint32_t{1} << i;
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Environment

Environment::Environment(std::vector<LossPtr> pieces, std::vector<int> schedule, NoiseModel noise, Mode mode)
    : pieces_(std::move(pieces)), schedule_(std::move(schedule)), noise_(noise), mode_(mode) {
  noise_.Validate();
  for (int idx : schedule_) {
    if (idx < 0 || idx >= static_cast<int>(pieces_.size())) {
      throw Error(ErrorKind::kInvalidInput, "schedule refers to a missing loss");
    }
  }
}

const LossFunction& Environment::LossAt(long t) const {
  if (t < 1 || t > horizon()) throw Error(ErrorKind::kInvalidInput, "round outside the horizon");
  return *pieces_[schedule_[t - 1]];
}

double Environment::Loss(long t, const Vector& x) const { return LossAt(t).Value(x); }

double Environment::Query(long t, const Vector& action, Rng& rng) const { return Loss(t, action) + noise_.Sample(rng); }

BanditQuery Environment::AsQuery() const {
  return [this](long t, const Vector& action, Rng& rng) { return Query(t, action, rng); };
}

Comparator BestFixedPoint(const Environment& env, const ConvexBody& body, int iterations) {
  const int d = body.dimension();
  Comparator best;
  best.x = body.InteriorPoint();
  if (env.horizon() == 0) return best;

  std::vector<double> weight(env.pieces().size(), 0.0);
  for (int idx : env.schedule()) weight[idx] += 1.0 / static_cast<double>(env.horizon());
  auto average = [&](const Vector& x) {
    double v = 0.0;
    for (std::size_t k = 0; k < weight.size(); ++k) {
      if (weight[k] > 0.0) v += weight[k] * env.pieces()[k]->Value(x);
    }
    return v;
  };
  auto subgradient = [&](const Vector& x) {
    Vector g = Vector::Zero(d);
    for (std::size_t k = 0; k < weight.size(); ++k) {
      if (weight[k] > 0.0) g += weight[k] * env.pieces()[k]->Subgradient(x);
    }
    return g;
  };

  // A weighted sum of isotropic quadratics is one isotropic quadratic.
  bool all_quadratic = true;
  Vector weighted_center = Vector::Zero(d);
  double total = 0.0;
  for (std::size_t k = 0; k < weight.size() && all_quadratic; ++k) {
    if (weight[k] == 0.0) continue;
    const auto q = env.pieces()[k]->IsotropicQuadratic();
    if (!q) {
      all_quadratic = false;
      break;
    }
    weighted_center += weight[k] * q->second * q->first;
    total += weight[k] * q->second;
  }
  if (all_quadratic && total > 0.0) best.x = body.Project(weighted_center / total);
  best.value = average(best.x);

  // Projected subgradient with step c / sqrt(k), keeping the best iterate.
  const double step_scale = body.BoundingRadius();
  Vector x = best.x;
  for (int k = 1; k <= iterations; ++k) {
    const Vector g = subgradient(x);
    const double norm = g.norm();
    if (norm == 0.0) break;
    x = body.Project(x - (step_scale / std::sqrt(static_cast<double>(k))) * g / norm);
    const double v = average(x);
    if (v < best.value) {
      best.value = v;
      best.x = x;
    }
  }
  return best;
}

std::vector<double> TrueRegret(const Environment& env, const std::vector<Vector>& actions, const Vector& comparator) {
  std::vector<double> out;
  out.reserve(actions.size());
  double total = 0.0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const long t = static_cast<long>(i) + 1;
    total += env.Loss(t, actions[i]) - env.Loss(t, comparator);
    out.push_back(total);
  }
  return out;
}

}  // namespace bco
