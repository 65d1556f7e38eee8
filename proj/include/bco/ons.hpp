#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bco/extension.hpp"
#include "bco/geometry.hpp"
#include "bco/qp_solver.hpp"
#include "bco/surrogate.hpp"

namespace bco {

enum class Mode { kAdversarial, kStochastic };

const char* ToString(Mode mode);
Mode ParseMode(const std::string& s);

struct AlgoConstants {
  Mode mode = Mode::kStochastic;
  long n = 0;
  int d = 1;
  double delta = 0.01;
  double C_log = 1.0;
  double L = 1.0;
  double eta = 0.0;
  double lambda = 0.0;
  double sigma_sq = 0.0;
  double gamma = 0.0;
  double epsilon = 0.0;
  double F_max = 0.0;
  double M = 1.0;
  std::vector<std::string> warnings;

  void Validate() const;
};

double LogFactor(long n, int d, double delta, double C_log);
AlgoConstants ConstantsAdversarial(long n, int d, double delta, double C_log = 1.0);
AlgoConstants ConstantsStochastic(long n, int d, double delta, double M, double C_log = 1.0);

// Phi(x) = 1/2 x^T P x + b^T x + c
struct QuadraticPotential {
  Matrix P;
  Vector b;
  double c = 0.0;

  static QuadraticPotential Initial(int d, double sigma_sq);
  double operator()(const Vector& x) const { return 0.5 * QuadForm(P, x) + b.dot(x) + c; }
};

// -gamma ||x - mu||^2_metric
struct Bonus {
  Vector mu;
  Matrix metric;
  double gamma = 0.0;
};

// Adds eta * q_hat(x) = eta (<g, x - mu> + 1/4 ||x - mu||^2_H) and the bonus.
void PotentialIngest(QuadraticPotential& phi, double eta, const Vector& g, const Matrix& H, const Vector& mu,
                     const std::optional<Bonus>& bonus);

struct LedgerEntry {
  Vector mu;
  Matrix precision;
};

// Rounds with a nonzero bonus. The running sums make z and the branch tests O(d^2).
struct BonusLedger {
  std::vector<LedgerEntry> entries;
  int m = 0;
  double w = 1.0;
  Matrix sum_precision;
  Vector sum_precision_mu;
  double sum_mu_form = 0.0;

  explicit BonusLedger(int d = 0);
  void Append(const Vector& mu, const Matrix& precision, double gamma);
  // sum_s ||z - mu_s||^2_{P_s}
  double Dispersion(const Vector& z) const;
};

// Closed-form weighted mean; the empty ledger returns mu_t.
Vector ComputeZ(const BonusLedger& ledger, const Vector& mu_t);

enum class BonusBranch { kDispersed = 1, kNotDominated = 2, kFarFromCenter = 3, kNone = 4 };

struct BonusDecision {
  bool fire = false;
  BonusBranch branch = BonusBranch::kNone;
};

BonusDecision DecideBonus(const BonusLedger& ledger, const Vector& z, const Vector& mu, const Matrix& precision,
                          double F_max);

struct EpochState {
  int t = 0;
  QuadraticPotential potential;
  std::vector<EllipsoidConstraint> focus;
  BonusLedger ledger;
  Vector mu;
  Matrix precision;
  Matrix covariance_factor;
  Vector precision_eigenvalues;
  Matrix precision_eigenvectors;
  std::vector<SurrogateTerm> surrogate_history;
  double shat_at_mu_sum = 0.0;

  static EpochState Fresh(int d, double sigma_sq);
};

struct IterateInfo {
  int floored = 0;
  bool converged = true;
};

// mu_t = argmin Phi over K_eps and the focus constraints, Sigma_t^{-1} the
// floored Phi''. Writes into state.
IterateInfo ComputeIterateAndCovariance(EpochState& state, const PositionedBody& pos, const AlgoConstants& k);

Vector SampleMetaAction(const Vector& mu, const Matrix& covariance_factor, Rng& rng);

void UpdateFocus(EpochState& state, double F_max);

double RestartThreshold(const AlgoConstants& k);
double ConvexifierWeight(const AlgoConstants& k);  // 160 lambda L^3 sqrt(n d)

// G(y) = sum_u s_hat_u(y) + Q_t(y) over the stored history.
SmoothObjective ConvexifiedObjective(const EpochState& state, const AlgoConstants& k);

struct RestartStatistic {
  double statistic = 0.0;  // eta (sum_u s_hat_u(mu_u) - min G)
  double threshold = 0.0;  // restart iff statistic <= -threshold
  double min_value = 0.0;
  Vector argmin;
  bool converged = false;
};

// Always solves the convexified problem.
RestartStatistic ComputeRestartStatistic(const EpochState& state, const AlgoConstants& k, const PositionedBody& pos);

struct RestartCheck {
  bool restart = false;
  double certificate = 0.0;  // eta (sum_u s_hat_u(mu_u) - sum_u s_hat_u(mu_t))
  bool solved = false;
};

// Q_t(mu_t) = 0 gives min G <= sum_u s_hat_u(mu_t); the solver is only run
// when that bound cannot rule the restart out.
RestartCheck RestartTest(const EpochState& state, const AlgoConstants& k, const PositionedBody& pos);

// Bandit feedback: loss + noise at an action in original coordinates.
using BanditQuery = std::function<double(long t, const Vector& action, Rng& rng)>;

struct RoundRecord {
  int epoch = 0;
  long t = 0;
  Vector X;        // positioned coordinates
  Vector A;        // original coordinates
  double Y = 0.0;
  double pip = 1.0;
  int m = 0;
  bool restart = false;
  bool bonus = false;
  double shat_stat = 0.0;  // eta sum_u (s_hat_u(mu_u) - s_hat_u(mu_t)) in the current epoch
};

struct RunDiagnostics {
  int restarts = 0;
  int bonuses = 0;
  int flooring_events = 0;
  int solver_nonconverged = 0;
  int max_m = 0;
  double min_w = 1.0;
  double max_recursion_error = 0.0;    // precision recursion, rounds without flooring
  int recursion_checks = 0;
  double max_main_text_gap = 0.0;      // relative gap to w (1/sigma^2 + eta sum H_u / w_u)
  bool fault = false;
  std::string fault_message;
  std::vector<std::string> warnings;
};

struct RegretTrace {
  std::vector<RoundRecord> rounds;
  RunDiagnostics diagnostics;
  Vector final_mu;  // original coordinates
};

// Everything a test needs to re-derive one round's update independently.
struct RoundDetail {
  const RoundRecord& record;
  const SurrogateEstimate& estimate;
  const Matrix& precision;        // Sigma_t^{-1} used this round
  const Matrix& potential_before;  // Phi'' before ingesting round t
  const Matrix& potential_after;
  const EpochState& state;        // after ingest, before any restart reset
  double gamma_t;                 // gamma if a bonus fired, else 0
};

struct RunOptions {
  std::function<void(const RoundDetail&)> observer;
};

RegretTrace Run(const BanditQuery& query, const PositionedBody& pos, const AlgoConstants& k, Rng& rng,
                RunOptions opts = {});

}  // namespace bco
