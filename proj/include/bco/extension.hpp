#pragma once

#include <functional>
#include <optional>

#include "bco/geometry.hpp"

namespace bco {

// X is the meta point, A = X / multiplier the action actually played,
// nudge = (multiplier - 1) / eps.
struct MetaQuery {
  Vector X;
  Vector A;
  double multiplier = 1.0;
  double nudge = 0.0;
};

struct ExtendedObservation {
  double Y = 0.0;
  std::optional<double> raw_loss;
  std::optional<double> noise;
};

// Loss on the positioned body.
using PointLoss = std::function<double(const Vector&)>;

MetaQuery MakeQuery(const PositionedBody& pos, const Vector& X);

// observed = loss(A) + noise, as returned by the environment.
double AssembleY(const MetaQuery& q, double observed);

// Noiseless f(x) = pi+ l(x / pi+) + 2 (pi+ - 1) / eps. Tests and regret only.
double ExtendEval(const PositionedBody& pos, const PointLoss& loss, const Vector& x);

}  // namespace bco
