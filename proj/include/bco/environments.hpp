#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bco/geometry.hpp"
#include "bco/ons.hpp"

namespace bco {

struct NoiseModel {
  enum class Kind { kNone, kGaussian, kUniform };
  Kind kind = Kind::kNone;
  double scale = 0.0;  // std for gaussian, half width for uniform

  static NoiseModel None() { return {}; }
  static NoiseModel Gaussian(double std);
  static NoiseModel Uniform(double half_width);
  void Validate() const;
  double Sample(Rng& rng) const;
};

// A convex loss on the original body with values in [0, 1].
class LossFunction {
 public:
  virtual ~LossFunction() = default;
  virtual double Value(const Vector& x) const = 0;
  virtual Vector Subgradient(const Vector& x) const = 0;
  // (center, coefficient) when the loss is coefficient * ||x - center||^2.
  virtual std::optional<std::pair<Vector, double>> IsotropicQuadratic() const { return std::nullopt; }
};

using LossPtr = std::shared_ptr<const LossFunction>;

// max_{x in K} ||x - a||, exact for balls, ellipsoids and vertex-listed polytopes.
double FarthestDistance(const ConvexBody& body, const Vector& a);

// scale * ||x - a||^2 / D^2 with D = FarthestDistance(K, a); scale in (0, 1].
LossPtr MakeQuadratic(const ConvexBody& body, const Vector& center, double scale = 1.0);
// Affine <c, x> rescaled to [0, 1] over K by the support function.
LossPtr MakeLinear(const ConvexBody& body, const Vector& c);
// max_i (<c_i, x> + b_i), rows of `slopes`, rescaled to [0, 1] over K.
LossPtr MakeMaxLinear(const ConvexBody& body, const Matrix& slopes, const Vector& offsets);

// Set functions on the ground set {0, ..., d-1}; a subset is a bit mask.
using SetFunction = std::function<double(std::uint32_t)>;

double LovaszExtension(const SetFunction& F, int d, const Vector& x);
Vector LovaszSubgradient(const SetFunction& F, int d, const Vector& x);
bool IsSubmodular(const SetFunction& F, int d, double tol = 1e-12);

struct WeightedEdge {
  int u = 0;
  int v = 0;
  double weight = 0.0;
};

// s-t cut: sum of crossing edge weights + sum_{i in S} sink_i + sum_{i not in S} source_i,
// shifted so that F(empty) = 0.
struct CutFunction {
  int d = 0;
  std::vector<WeightedEdge> edges;
  Vector source;  // may be empty (treated as zeros)
  Vector sink;

  double operator()(std::uint32_t mask) const;
  double Raw(std::uint32_t mask) const;
};

struct SetMinimum {
  std::uint32_t mask = 0;
  double value = 0.0;
  double max_value = 0.0;
};

SetMinimum BruteForceMinimum(const SetFunction& F, int d);

// (Lovasz(x) - min F) / (max F - min F) on the box [0, 1]^d.
LossPtr MakeLovaszLoss(SetFunction F, int d);

// Threshold rounding {i : x_i >= theta}.
std::uint32_t RoundToSet(const Vector& x, double theta);

// An oblivious sequence of losses fixed before the run.
class Environment {
 public:
  Environment(std::vector<LossPtr> pieces, std::vector<int> schedule, NoiseModel noise, Mode mode);

  long horizon() const { return static_cast<long>(schedule_.size()); }
  Mode mode() const { return mode_; }
  const NoiseModel& noise() const { return noise_; }

  // Noiseless white-box value; t is 1-based.
  double Loss(long t, const Vector& x) const;
  const LossFunction& LossAt(long t) const;
  double Query(long t, const Vector& action, Rng& rng) const;
  BanditQuery AsQuery() const;

  const std::vector<LossPtr>& pieces() const { return pieces_; }
  const std::vector<int>& schedule() const { return schedule_; }

 private:
  std::vector<LossPtr> pieces_;
  std::vector<int> schedule_;
  NoiseModel noise_;
  Mode mode_;
};

struct Comparator {
  Vector x;
  double value = 0.0;  // average loss at x
};

// Minimizer of the average loss over K (original coordinates).
Comparator BestFixedPoint(const Environment& env, const ConvexBody& body, int iterations = 1500);

// Prefix sums of l_t(A_t) - l_t(x*).
std::vector<double> TrueRegret(const Environment& env, const std::vector<Vector>& actions, const Vector& comparator);

}  // namespace bco
