#include "bco/ons.hpp"

#include <algorithm>
#include <cmath>

#include "bco/error.hpp"

namespace bco {

const char* ToString(Mode mode) { return mode == Mode::kAdversarial ? "adversarial" : "stochastic"; }

Mode ParseMode(const std::string& s) {
  if (s == "adversarial") return Mode::kAdversarial;
  if (s == "stochastic") return Mode::kStochastic;
  throw Error(ErrorKind::kConfig, "unknown mode '" + s + "'");
}

// ---------------------------------------------------------------------------
// Constants

double LogFactor(long n, int d, double delta, double C_log) {
  const double largest = std::max({static_cast<double>(n), static_cast<double>(d), 1.0 / delta});
  return C_log * (1.0 + std::log(largest));
}

namespace {

void CheckCommonInputs(long n, int d, double delta, double C_log) {
  if (n < 1) throw Error(ErrorKind::kInvalidInput, "horizon n must be at least 1");
  if (d < 1) throw Error(ErrorKind::kInvalidInput, "dimension d must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorKind::kInvalidInput, "delta must lie in (0, 1)");
  if (!(C_log > 0.0)) throw Error(ErrorKind::kInvalidInput, "C_log must be positive");
}

void ClampEpsilon(AlgoConstants& k) {
  if (k.epsilon > 0.49) {
    k.warnings.push_back("horizon too short: epsilon formula gave " + std::to_string(k.epsilon) +
                         ", clamped to 0.49");
    k.epsilon = 0.49;
  }
}

void ClampLambda(AlgoConstants& k) {
  if (k.lambda >= 1.0) {
    k.warnings.push_back("lambda formula gave " + std::to_string(k.lambda) + ", clamped to 0.5");
    k.lambda = 0.5;
  }
}

}  // namespace

void AlgoConstants::Validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidInput, what); };
  if (n < 0) fail("n must be non-negative");
  if (d < 1) fail("d must be positive");
  if (!(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0, 1)");
  if (!(eta > 0.0) || !std::isfinite(eta)) fail("eta must be positive");
  if (!(lambda > 0.0 && lambda < 1.0)) fail("lambda must lie in (0, 1)");
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) fail("sigma_sq must be positive");
  if (!(epsilon > 0.0 && epsilon < 0.5)) fail("epsilon must lie in (0, 1/2)");
  if (!(F_max > 0.0) || !std::isfinite(F_max)) fail("F_max must be positive");
  if (!(L > 0.0)) fail("L must be positive");
  if (mode == Mode::kStochastic) {
    if (gamma != 0.0) fail("gamma must be 0 in stochastic mode");
    const double floor = 1.0 / std::sqrt(static_cast<double>(d));
    if (!(M >= floor - 1e-12 && M <= 1.0 + 1e-9)) fail("M must lie in [d^{-1/2}, 1]");
  } else if (!(gamma > 0.0 && gamma < 0.5)) {
    fail("gamma must lie in (0, 1/2) in adversarial mode");
  }
}

AlgoConstants ConstantsAdversarial(long n, int d, double delta, double C_log) {
  CheckCommonInputs(n, d, delta, C_log);
  AlgoConstants k;
  k.mode = Mode::kAdversarial;
  k.n = n;
  k.d = d;
  k.delta = delta;
  k.C_log = C_log;
  k.L = LogFactor(n, d, delta, C_log);
  const double dd = d;
  const double L = k.L;
  k.lambda = 1.0 / (dd * dd * dd * std::pow(L, 5));
  k.gamma = 1.0 / (4.0 * dd * L);
  k.eta = std::sqrt(dd / (static_cast<double>(n) * L * L * L));
  k.sigma_sq = 1.0 / (dd * dd);
  k.epsilon = std::pow(dd, 3.5) * std::pow(L, 8.5) / std::sqrt(static_cast<double>(n));
  k.F_max = std::pow(dd, 5) * std::pow(L, 8);
  k.M = 1.0;
  ClampLambda(k);
  ClampEpsilon(k);
  if (k.gamma >= 0.5) throw Error(ErrorKind::kInvalidInput, "gamma = 1/(4dL) must be below 1/2");
  return k;
}

AlgoConstants ConstantsStochastic(long n, int d, double delta, double M, double C_log) {
  CheckCommonInputs(n, d, delta, C_log);
  const double dd = d;
  if (!(M >= 1.0 / std::sqrt(dd) - 1e-12 && M <= 1.0 + 1e-9)) {
    throw Error(ErrorKind::kInvalidInput, "M must lie in [d^{-1/2}, 1]");
  }
  AlgoConstants k;
  k.mode = Mode::kStochastic;
  k.n = n;
  k.d = d;
  k.delta = delta;
  k.C_log = C_log;
  k.M = M;
  k.L = LogFactor(n, d, delta, C_log);
  const double L = k.L;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  k.gamma = 0.0;
  k.eta = M * dd / sqrt_n;
  k.lambda = 5.0 / (M * std::pow(dd, 1.5) * L * L * L);
  k.sigma_sq = 1.0 / (16.0 * M * M * dd * L * L * L);
  k.epsilon = M * dd * dd * std::pow(L, 5) / sqrt_n;
  k.F_max = 25.0 * M * M * dd * dd * dd * std::pow(L, 5);
  ClampLambda(k);
  ClampEpsilon(k);
  return k;
}

// ---------------------------------------------------------------------------
// Potential and bonus ledger

QuadraticPotential QuadraticPotential::Initial(int d, double sigma_sq) {
  QuadraticPotential phi;
  phi.P = Matrix::Identity(d, d) / sigma_sq;
  phi.b = Vector::Zero(d);
  phi.c = 0.0;
  return phi;
}

void PotentialIngest(QuadraticPotential& phi, double eta, const Vector& g, const Matrix& H, const Vector& mu,
                     const std::optional<Bonus>& bonus) {
  const Vector h_mu = H * mu;
  phi.P += 0.5 * eta * H;
  phi.b += eta * (g - 0.5 * h_mu);
  phi.c += eta * (-g.dot(mu) + 0.25 * mu.dot(h_mu));
  if (bonus) {
    const Vector a_mu = bonus->metric * bonus->mu;
    phi.P -= 2.0 * bonus->gamma * bonus->metric;
    phi.b += 2.0 * bonus->gamma * a_mu;
    phi.c -= bonus->gamma * bonus->mu.dot(a_mu);
  }
  phi.P = Symmetrized(phi.P);
}

BonusLedger::BonusLedger(int d) : sum_precision(Matrix::Zero(d, d)), sum_precision_mu(Vector::Zero(d)) {}

void BonusLedger::Append(const Vector& mu, const Matrix& precision, double gamma) {
  entries.push_back(LedgerEntry{mu, precision});
  ++m;
  w = std::pow(1.0 - 2.0 * gamma, m);
  const Vector pm = precision * mu;
  sum_precision += precision;
  sum_precision_mu += pm;
  sum_mu_form += mu.dot(pm);
}

double BonusLedger::Dispersion(const Vector& z) const {
  if (entries.empty()) return 0.0;
  return std::max(0.0, QuadForm(sum_precision, z) - 2.0 * z.dot(sum_precision_mu) + sum_mu_form);
}

Vector ComputeZ(const BonusLedger& ledger, const Vector& mu_t) {
  if (ledger.entries.empty()) return mu_t;
  Eigen::LLT<Matrix> llt(ledger.sum_precision);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::kInternal, "bonus ledger aggregate is singular");
  return llt.solve(ledger.sum_precision_mu);
}

BonusDecision DecideBonus(const BonusLedger& ledger, const Vector& z, const Vector& mu, const Matrix& precision,
                          double F_max) {
  BonusDecision out;
  if (ledger.Dispersion(z) >= F_max / 24.0) {
    out.branch = BonusBranch::kDispersed;
    return out;
  }
  const Matrix aggregate = ledger.entries.empty() ? Matrix::Zero(precision.rows(), precision.cols())
                                                   : ledger.sum_precision;
  Eigen::SelfAdjointEigenSolver<Matrix> gap(Symmetrized(aggregate - precision), Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Matrix> scale(precision, Eigen::EigenvaluesOnly);
  if (gap.eigenvalues().minCoeff() < -1e-10 * scale.eigenvalues().cwiseAbs().maxCoeff()) {
    out.fire = true;
    out.branch = BonusBranch::kNotDominated;
    return out;
  }
  if (QuadForm(precision, mu - z) >= F_max / 3.0) {
    out.fire = true;
    out.branch = BonusBranch::kFarFromCenter;
    return out;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Epoch state

EpochState EpochState::Fresh(int d, double sigma_sq) {
  EpochState s;
  s.potential = QuadraticPotential::Initial(d, sigma_sq);
  s.ledger = BonusLedger(d);
  s.mu = Vector::Zero(d);
  s.precision = s.potential.P;
  s.covariance_factor = Matrix::Identity(d, d) * std::sqrt(sigma_sq);
  s.precision_eigenvalues = Vector::Constant(d, 1.0 / sigma_sq);
  s.precision_eigenvectors = Matrix::Identity(d, d);
  return s;
}

IterateInfo ComputeIterateAndCovariance(EpochState& state, const PositionedBody& pos, const AlgoConstants& k) {
  const double floor = 1e-10 / k.sigma_sq;
  QuadraticSolveOptions opts;
  opts.eigen_floor = floor;
  opts.warm_start = state.mu;
  const SolveResult res = MinimizeQuadratic(state.potential.P, state.potential.b, pos, state.focus, opts);
  state.mu = res.x;

  const FlooredMatrix fl = FloorEigenvalues(state.potential.P, floor);
  state.precision = fl.matrix;
  state.precision_eigenvalues = fl.eigenvalues;
  state.precision_eigenvectors = fl.eigenvectors;
  state.covariance_factor =
      fl.eigenvectors * fl.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() * fl.eigenvectors.transpose();

  IterateInfo info;
  info.floored = fl.raised;
  info.converged = res.converged;
  return info;
}

Vector SampleMetaAction(const Vector& mu, const Matrix& covariance_factor, Rng& rng) {
  return mu + covariance_factor * StandardNormal(static_cast<int>(mu.size()), rng);
}

void UpdateFocus(EpochState& state, double F_max) {
  state.focus.push_back(EllipsoidConstraint::Make(state.mu, state.precision, F_max, state.precision_eigenvalues,
                                                  state.precision_eigenvectors));
}

// ---------------------------------------------------------------------------
// Restarts

double RestartThreshold(const AlgoConstants& k) {
  const double dd = k.d;
  return 160.0 * k.F_max / (dd * dd * std::pow(k.L, 2.5)) + k.gamma * k.F_max / 32.0;
}

double ConvexifierWeight(const AlgoConstants& k) {
  return 160.0 * k.lambda * std::pow(k.L, 3) * std::sqrt(static_cast<double>(k.n) * k.d);
}

SmoothObjective ConvexifiedObjective(const EpochState& state, const AlgoConstants& k) {
  const double weight = ConvexifierWeight(k);
  const std::vector<SurrogateTerm>* history = &state.surrogate_history;
  const Vector mu = state.mu;
  const Matrix precision = state.precision;
  return [history, weight, mu, precision](const Vector& y, Vector& grad) {
    const Vector dy = y - mu;
    const Vector p_dy = precision * dy;
    double value = weight * dy.dot(p_dy);
    grad = 2.0 * weight * p_dy;
    Vector term_grad;
    for (const auto& term : *history) {
      value += term.ValueAndGrad(y, term_grad);
      grad += term_grad;
    }
    return value;
  };
}

RestartStatistic ComputeRestartStatistic(const EpochState& state, const AlgoConstants& k, const PositionedBody& pos) {
  SmoothSolveOptions opts;
  opts.start = state.mu;
  const SolveResult res = MinimizeSmoothConvex(ConvexifiedObjective(state, k), pos, state.focus, opts);
  RestartStatistic out;
  out.min_value = res.value;
  out.argmin = res.x;
  out.converged = res.converged;
  out.statistic = k.eta * (state.shat_at_mu_sum - res.value);
  out.threshold = RestartThreshold(k);
  return out;
}

RestartCheck RestartTest(const EpochState& state, const AlgoConstants& k, const PositionedBody& pos) {
  RestartCheck out;
  if (state.surrogate_history.empty()) return out;
  double at_mu = 0.0;
  for (const auto& term : state.surrogate_history) at_mu += term.Value(state.mu);
  out.certificate = k.eta * (state.shat_at_mu_sum - at_mu);
  const double threshold = RestartThreshold(k);
  if (out.certificate > -threshold) return out;
  out.solved = true;
  out.restart = ComputeRestartStatistic(state, k, pos).statistic <= -threshold;
  return out;
}

// ---------------------------------------------------------------------------
// Main loop

RegretTrace Run(const BanditQuery& query, const PositionedBody& pos_in, const AlgoConstants& k, Rng& rng,
                RunOptions opts) {
  k.Validate();
  const int d = pos_in.dimension();
  if (k.d != d) throw Error(ErrorKind::kInvalidInput, "constants dimension does not match the body");
  const PositionedBody pos = pos_in.WithEpsilon(k.epsilon);
  const bool adversarial = k.mode == Mode::kAdversarial;

  RegretTrace trace;
  RunDiagnostics& diag = trace.diagnostics;
  diag.warnings = k.warnings;
  trace.rounds.reserve(static_cast<std::size_t>(std::max<long>(k.n, 0)));

  EpochState state = EpochState::Fresh(d, k.sigma_sq);
  Matrix main_text_sum = Matrix::Zero(d, d);  // sum_u H_u / w_u
  int epoch = 0;
  Vector last_mu = state.mu;

  try {
    for (long t = 1; t <= k.n; ++t) {
      ++state.t;
      const IterateInfo info = ComputeIterateAndCovariance(state, pos, k);
      last_mu = state.mu;
      if (info.floored > 0) ++diag.flooring_events;
      if (!info.converged) ++diag.solver_nonconverged;

      const Vector X = SampleMetaAction(state.mu, state.covariance_factor, rng);
      const MetaQuery q = MakeQuery(pos, X);
      const Vector action = pos.map().Inverse(q.A);
      const double Y = AssembleY(q, query(t, action, rng));

      SurrogateParams params;
      params.lambda = k.lambda;
      params.mu = state.mu;
      params.precision = state.precision;
      params.covariance_factor = state.covariance_factor;
      const SurrogateEstimate est = Estimate(params, X, Y, state.mu);
      state.shat_at_mu_sum += est.value;
      if (adversarial) state.surrogate_history.emplace_back(params, X, Y);

      UpdateFocus(state, k.F_max);

      std::optional<Bonus> bonus;
      if (adversarial) {
        const Vector z = ComputeZ(state.ledger, state.mu);
        if (DecideBonus(state.ledger, z, state.mu, state.precision, k.F_max).fire) {
          bonus = Bonus{state.mu, state.precision, k.gamma};
          state.ledger.Append(state.mu, state.precision, k.gamma);
          ++diag.bonuses;
        }
      }

      const Matrix before = state.potential.P;
      PotentialIngest(state.potential, k.eta, est.grad, est.hess, state.mu, bonus);
      const double gamma_t = bonus ? k.gamma : 0.0;
      if (info.floored == 0) {
        const Matrix expected = (1.0 - 2.0 * gamma_t) * before + 0.5 * k.eta * est.hess;
        const double err = (state.potential.P - expected).norm() / expected.norm();
        diag.max_recursion_error = std::max(diag.max_recursion_error, err);
        ++diag.recursion_checks;
      }
      main_text_sum += est.hess / state.ledger.w;
      const Matrix main_text =
          state.ledger.w * (Matrix::Identity(d, d) / k.sigma_sq + k.eta * main_text_sum);
      diag.max_main_text_gap =
          std::max(diag.max_main_text_gap, (state.potential.P - main_text).norm() / main_text.norm());

      RoundRecord rec;
      rec.epoch = epoch;
      rec.t = t;
      rec.X = X;
      rec.A = action;
      rec.Y = Y;
      rec.pip = q.multiplier;
      rec.m = state.ledger.m;
      rec.bonus = bonus.has_value();
      diag.max_m = std::max(diag.max_m, state.ledger.m);
      diag.min_w = std::min(diag.min_w, state.ledger.w);

      if (adversarial) {
        const RestartCheck rc = RestartTest(state, k, pos);
        rec.shat_stat = rc.certificate;
        rec.restart = rc.restart;
      }
      trace.rounds.push_back(rec);
      if (opts.observer) {
        opts.observer(RoundDetail{trace.rounds.back(), est, params.precision, before, state.potential.P, state,
                                  gamma_t});
      }
      if (rec.restart) {
        ++diag.restarts;
        ++epoch;
        state = EpochState::Fresh(d, k.sigma_sq);
        main_text_sum.setZero();
      }
    }
  } catch (const Error& e) {
    diag.fault = true;
    diag.fault_message = e.what();
  }
  trace.final_mu = pos.map().Inverse(last_mu);
  return trace;
}

}  // namespace bco
