#include "bco/extension.hpp"

#include <cmath>

#include "bco/error.hpp"

namespace bco {

MetaQuery MakeQuery(const PositionedBody& pos, const Vector& X) {
  if (!X.allFinite()) throw Error(ErrorKind::kInvalidInput, "meta point has non-finite entries");
  MetaQuery q;
  q.X = X;
  q.multiplier = Pip(pos, X);
  q.A = X / q.multiplier;
  q.nudge = (q.multiplier - 1.0) / pos.epsilon();
  return q;
}

double AssembleY(const MetaQuery& q, double observed) {
  if (!std::isfinite(observed)) throw Error(ErrorKind::kInvalidInput, "observed loss is not finite");
  return q.multiplier * observed + 2.0 * q.nudge;
}

double ExtendEval(const PositionedBody& pos, const PointLoss& loss, const Vector& x) {
  const MetaQuery q = MakeQuery(pos, x);
  return AssembleY(q, loss(q.A));
}

}  // namespace bco
