#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bco/linalg.hpp"

namespace bco {

// y = T (x - c)
struct AffineMap {
  Matrix T;
  Matrix T_inv;
  Vector c;

  static AffineMap Identity(int d);
  static AffineMap FromLinear(const Matrix& t, const Vector& c);

  Vector Apply(const Vector& x) const { return T * (x - c); }
  Vector Inverse(const Vector& y) const { return T_inv * y + c; }
};

class ConvexBody;
using BodyPtr = std::shared_ptr<const ConvexBody>;

// A convex body known through a membership oracle. Built-in bodies also
// provide a closed-form gauge, a Euclidean projection and a support function.
class ConvexBody : public std::enable_shared_from_this<ConvexBody> {
 public:
  virtual ~ConvexBody() = default;

  virtual std::string Kind() const = 0;
  virtual int dimension() const = 0;
  virtual bool Contains(const Vector& x) const = 0;
  virtual Vector InteriorPoint() const = 0;

  // Minkowski functional with respect to the origin, when a closed form exists.
  virtual std::optional<double> ExactGauge(const Vector& /*x*/) const { return std::nullopt; }

  virtual bool HasProjection() const { return false; }
  virtual Vector Project(const Vector& x) const;

  // max_{x in K} <c, x>
  virtual double Support(const Vector& c) const;

  // Upper bound on max_{x in K} ||x||.
  virtual double BoundingRadius() const;

  // The image {map(x) : x in K}.
  virtual BodyPtr Transformed(const AffineMap& map) const;
};

class MembershipBody : public ConvexBody {
 public:
  MembershipBody(int d, std::function<bool(const Vector&)> membership, Vector interior);

  std::string Kind() const override { return "membership"; }
  int dimension() const override { return d_; }
  bool Contains(const Vector& x) const override { return membership_(x); }
  Vector InteriorPoint() const override { return interior_; }

 private:
  int d_;
  std::function<bool(const Vector&)> membership_;
  Vector interior_;
};

// {x : (x - m)^T A (x - m) <= 1}
class EllipsoidBody : public ConvexBody {
 public:
  EllipsoidBody(Vector center, Matrix shape);

  std::string Kind() const override { return "ellipsoid"; }
  int dimension() const override { return static_cast<int>(center_.size()); }
  bool Contains(const Vector& x) const override;
  Vector InteriorPoint() const override { return center_; }
  std::optional<double> ExactGauge(const Vector& x) const override;
  bool HasProjection() const override { return true; }
  Vector Project(const Vector& x) const override;
  double Support(const Vector& c) const override;
  double BoundingRadius() const override;
  BodyPtr Transformed(const AffineMap& map) const override;

  const Vector& center() const { return center_; }
  const Matrix& shape() const { return shape_; }

 protected:
  Vector center_;
  Matrix shape_;
  Matrix shape_inv_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
};

class BallBody : public EllipsoidBody {
 public:
  BallBody(Vector center, double radius);
  static std::shared_ptr<BallBody> Unit(int d) { return std::make_shared<BallBody>(Vector::Zero(d), 1.0); }

  std::string Kind() const override { return "ball"; }
  std::optional<double> ExactGauge(const Vector& x) const override;
  Vector Project(const Vector& x) const override;
  double radius() const { return radius_; }

 private:
  double radius_;
};

// {x : A x <= b}. Optional vertex list (exact for bodies derived from boxes
// and simplices) tightens the support function and bounding radius.
class PolytopeBody : public ConvexBody {
 public:
  PolytopeBody(Matrix a, Vector b, std::optional<Vector> interior = std::nullopt,
               std::vector<Vector> vertices = {});

  std::string Kind() const override { return "polytope"; }
  int dimension() const override { return static_cast<int>(a_.cols()); }
  bool Contains(const Vector& x) const override;
  Vector InteriorPoint() const override;
  std::optional<double> ExactGauge(const Vector& x) const override;
  bool HasProjection() const override { return true; }
  Vector Project(const Vector& x) const override;
  double Support(const Vector& c) const override;
  double BoundingRadius() const override;
  BodyPtr Transformed(const AffineMap& map) const override;

  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }

 protected:
  Matrix a_;
  Vector b_;
  std::optional<Vector> interior_;
  std::vector<Vector> vertices_;
  Vector row_norms_sq_;
};

class BoxBody : public PolytopeBody {
 public:
  BoxBody(Vector lo, Vector hi);

  std::string Kind() const override { return "box"; }
  bool Contains(const Vector& x) const override;
  Vector Project(const Vector& x) const override;
  double Support(const Vector& c) const override;

  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }

 private:
  Vector lo_;
  Vector hi_;
};

// {x : x >= 0, sum(x) <= scale}
class SimplexBody : public PolytopeBody {
 public:
  SimplexBody(int d, double scale);

  std::string Kind() const override { return "simplex"; }
  Vector Project(const Vector& x) const override;

 private:
  double scale_;
};

// Euclidean projection onto {x : (x - m)^T A (x - m) <= r2} for PSD A given by
// its eigendecomposition.
Vector ProjectOntoEllipsoid(const Vector& x, const Vector& center, const Vector& eigenvalues,
                            const Matrix& eigenvectors, double radius_sq);

struct PositioningReport {
  int samples = 0;
  int inner_ball_violations = 0;  // directions u with gauge(u) > 1
  double covariance_deviation = 0.0;  // ||Cov(validation) - I||_F in positioned coordinates
};

// A body together with the affine change of coordinates, the shrink factor
// epsilon and the mean-width constant M. All algorithmic work happens in the
// positioned coordinates.
class PositionedBody {
 public:
  PositionedBody(BodyPtr original, AffineMap map, double epsilon, double mean_width);

  // No change of coordinates; the body must already be rounded.
  static PositionedBody AsIs(BodyPtr body, double epsilon = 0.1, double mean_width = 1.0);

  const ConvexBody& body() const { return *positioned_; }
  BodyPtr body_ptr() const { return positioned_; }
  const ConvexBody& original() const { return *original_; }
  BodyPtr original_ptr() const { return original_; }
  const AffineMap& map() const { return map_; }
  int dimension() const { return positioned_->dimension(); }
  double epsilon() const { return epsilon_; }
  double mean_width() const { return mean_width_; }

  PositionedBody WithEpsilon(double epsilon) const;
  PositionedBody WithMeanWidth(double mean_width) const;

  // Membership of K_eps = (1 - eps) K, inflated by a relative tolerance.
  bool InShrunkBody(const Vector& y, double inflation = 1e-8) const;
  // Euclidean projection onto K_eps (built-in bodies only).
  Vector ProjectShrunk(const Vector& y) const;
  double ShrunkBoundingRadius() const;

  PositioningReport report;

 private:
  BodyPtr original_;
  BodyPtr positioned_;
  AffineMap map_;
  double epsilon_;
  double mean_width_;
};

// Minkowski functional; closed form when the body has one, bisection otherwise.
double Gauge(const ConvexBody& body, const Vector& x);
double GaugeBisection(const ConvexBody& body, const Vector& x);

// pi^+(x) = max(1, gauge(x) / (1 - eps))
double Pip(const PositionedBody& pos, const Vector& x);
Vector RadialProject(const PositionedBody& pos, const Vector& x);

Vector HitAndRunSample(const ConvexBody& body, const Vector& start, int burn_in, Rng& rng);

// n_samples <= 0 selects 50 d^2, burn_in <= 0 selects 30 d.
PositionedBody PositionIsotropic(BodyPtr body, int n_samples, Rng& rng, int burn_in = 0);

double EstimateMeanWidth(const PositionedBody& pos, int n_dirs, Rng& rng);

}  // namespace bco
