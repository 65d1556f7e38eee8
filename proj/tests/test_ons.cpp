#include <cmath>
#include <memory>

#include "doctest.h"
#include "oracles.hpp"

#include "bco/error.hpp"
#include "bco/ons.hpp"

using namespace bco;

namespace {

Vector V(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// C_log that makes L exactly one.
double UnitLogConstant(long n, int d, double delta) {
  return 1.0 / (1.0 + std::log(std::max({static_cast<double>(n), static_cast<double>(d), 1.0 / delta})));
}

// Drives an epoch by hand with arbitrary observations Y in [0, y_max].
EpochState SimulateEpoch(const AlgoConstants& k, const PositionedBody& pos, int rounds, double y_max, Rng& rng) {
  EpochState state = EpochState::Fresh(k.d, k.sigma_sq);
  std::uniform_real_distribution<double> unif(0.0, y_max);
  for (int t = 0; t < rounds; ++t) {
    ++state.t;
    ComputeIterateAndCovariance(state, pos, k);
    const Vector X = SampleMetaAction(state.mu, state.covariance_factor, rng);
    const double Y = unif(rng);
    SurrogateParams params{k.lambda, state.mu, state.precision, state.covariance_factor};
    const SurrogateEstimate est = Estimate(params, X, Y, state.mu);
    state.shat_at_mu_sum += est.value;
    state.surrogate_history.emplace_back(params, X, Y);
    UpdateFocus(state, k.F_max);
    PotentialIngest(state.potential, k.eta, est.grad, est.hess, state.mu, std::nullopt);
  }
  return state;
}

// G over the stored history, evaluated from explicit Gaussian densities.
double OracleG(const EpochState& state, const AlgoConstants& k, const oracle::Vec& y, bool convexify) {
  double total = 0.0;
  for (const auto& term : state.surrogate_history) {
    const Matrix cov = term.params().precision.inverse();
    total += oracle::SHat(term.params().mu, cov, k.lambda, term.X(), term.Y(), y);
  }
  if (convexify) {
    const double weight = 160.0 * k.lambda * std::pow(k.L, 3) * std::sqrt(static_cast<double>(k.n) * k.d);
    total += weight * (y - state.mu).dot(state.precision * (y - state.mu));
  }
  return total;
}

bool InFocus(const EpochState& state, const PositionedBody& pos, const oracle::Vec& y) {
  if (!pos.InShrunkBody(y, 0.0)) return false;
  for (const auto& c : state.focus)
    if (c.Value(y) > c.radius_sq) return false;
  return true;
}

}  // namespace

TEST_CASE("adversarial constants") {
  SUBCASE("L = 1") {
    const AlgoConstants k = ConstantsAdversarial(1000, 2, 0.01, UnitLogConstant(1000, 2, 0.01));
    CHECK(k.L == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(k.sigma_sq == doctest::Approx(0.25));
    CHECK(k.gamma == doctest::Approx(0.125));
    CHECK(k.F_max == doctest::Approx(32.0));
  }
  SUBCASE("n = 10^4, d = 2") {
    const AlgoConstants k = ConstantsAdversarial(10000, 2, 0.01, 1.0);
    CHECK(k.L == doctest::Approx(10.21034).epsilon(1e-6));
    CHECK(k.gamma == doctest::Approx(0.0122428).epsilon(1e-5));
    CHECK(k.eta == doctest::Approx(4.335e-4).epsilon(1e-3));
    CHECK(k.epsilon == 0.49);
    CHECK(k.warnings.size() == 1);
  }
  SUBCASE("formulas on random inputs") {
    auto rng = oracle::MakeRng(1);
    for (int i = 0; i < 100; ++i) {
      const long n = 1 + static_cast<long>(oracle::Uniform(0, 1e6, rng));
      const int d = 1 + i % 8;
      const double delta = oracle::Uniform(1e-4, 0.5, rng);
      const double c = oracle::Uniform(0.05, 2.0, rng);
      const auto o = oracle::Adversarial(n, d, delta, c);
      if (o.lambda >= 1.0 || 1.0 / (4.0 * d * o.L) >= 0.5) continue;
      const AlgoConstants k = ConstantsAdversarial(n, d, delta, c);
      CHECK(k.L == doctest::Approx(o.L).epsilon(1e-12));
      CHECK(k.eta == doctest::Approx(o.eta).epsilon(1e-12));
      CHECK(k.lambda == doctest::Approx(o.lambda).epsilon(1e-12));
      CHECK(k.sigma_sq == doctest::Approx(o.sigma_sq).epsilon(1e-12));
      CHECK(k.gamma == doctest::Approx(o.gamma).epsilon(1e-12));
      CHECK(k.F_max == doctest::Approx(o.F_max).epsilon(1e-12));
      CHECK(k.epsilon == doctest::Approx(std::min(o.epsilon, 0.49)).epsilon(1e-12));
      CHECK((o.epsilon > 0.49) == !k.warnings.empty());
    }
  }
}

TEST_CASE("stochastic constants") {
  SUBCASE("L = 1") {
    const AlgoConstants k = ConstantsStochastic(1000, 4, 0.01, 0.5, UnitLogConstant(1000, 4, 0.01));
    CHECK(k.sigma_sq == doctest::Approx(1.0 / 16.0));
    CHECK(k.F_max == doctest::Approx(400.0));
    // 5 / (M d^1.5 L^3) = 1.25 exceeds one and is clamped.
    CHECK(k.lambda == 0.5);
    CHECK(k.gamma == 0.0);
  }
  SUBCASE("eta") {
    const AlgoConstants k = ConstantsStochastic(10000, 4, 0.01, 0.5, 1.0);
    CHECK(k.eta == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(k.gamma == 0.0);
  }
  SUBCASE("formulas on random inputs") {
    auto rng = oracle::MakeRng(2);
    for (int i = 0; i < 100; ++i) {
      const long n = 1 + static_cast<long>(oracle::Uniform(0, 1e6, rng));
      const int d = 1 + i % 8;
      const double M = oracle::Uniform(1.0 / std::sqrt(d), 1.0, rng);
      const double c = oracle::Uniform(0.05, 2.0, rng);
      const auto o = oracle::Stochastic(n, d, 0.01, M, c);
      const AlgoConstants k = ConstantsStochastic(n, d, 0.01, M, c);
      CHECK(k.eta == doctest::Approx(o.eta).epsilon(1e-12));
      CHECK(k.lambda == doctest::Approx(o.lambda >= 1.0 ? 0.5 : o.lambda).epsilon(1e-12));
      CHECK(k.sigma_sq == doctest::Approx(o.sigma_sq).epsilon(1e-12));
      CHECK(k.F_max == doctest::Approx(o.F_max).epsilon(1e-12));
      CHECK(k.epsilon == doctest::Approx(std::min(o.epsilon, 0.49)).epsilon(1e-12));
      CHECK(k.gamma == 0.0);
    }
  }
  SUBCASE("invalid inputs") {
    CHECK_THROWS_AS(ConstantsStochastic(100, 4, 0.01, 0.3), Error);
    CHECK_THROWS_AS(ConstantsAdversarial(100, 2, 1.5), Error);
    CHECK_THROWS_AS(ConstantsAdversarial(0, 2, 0.1), Error);
  }
}

TEST_CASE("potential ingest examples") {
  QuadraticPotential phi = QuadraticPotential::Initial(1, 0.25);
  CHECK(phi.P(0, 0) == 4.0);
  QuadraticPotential same = phi;
  PotentialIngest(same, 0.1, Vector::Zero(1), Matrix::Zero(1, 1), V({0.3}), std::nullopt);
  CHECK(same.P == phi.P);

  QuadraticPotential a = phi;
  PotentialIngest(a, 0.1, Vector::Zero(1), 2.0 * Matrix::Identity(1, 1), Vector::Zero(1), std::nullopt);
  CHECK(a.P(0, 0) == doctest::Approx(4.1).epsilon(1e-15));

  QuadraticPotential b = phi;
  PotentialIngest(b, 0.1, Vector::Zero(1), Matrix::Zero(1, 1), V({0.2}),
                  Bonus{V({0.2}), 4.0 * Matrix::Identity(1, 1), 0.125});
  CHECK(b.P(0, 0) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("potential equals the accumulated expression") {
  auto rng = oracle::MakeRng(3);
  const int d = 3;
  const double sigma_sq = 0.5, eta = 0.2;
  QuadraticPotential phi = QuadraticPotential::Initial(d, sigma_sq);
  struct Piece {
    Vector g, mu;
    Matrix H;
    std::optional<Bonus> bonus;
  };
  std::vector<Piece> pieces;
  for (int t = 0; t < 30; ++t) {
    Piece p{oracle::Normal(d, rng), oracle::Normal(d, rng) * 0.3, Matrix(), std::nullopt};
    const Matrix h = oracle::Normal(d * d, rng).reshaped(d, d);
    p.H = 0.5 * (h + h.transpose());
    if (t % 4 == 0) p.bonus = Bonus{p.mu, oracle::SpdMatrix(d, 0.5, 2.0, rng), 0.01};
    PotentialIngest(phi, eta, p.g, p.H, p.mu, p.bonus);
    pieces.push_back(p);
  }
  auto explicit_phi = [&](const oracle::Vec& x) {
    double v = x.squaredNorm() / (2.0 * sigma_sq);
    for (const auto& p : pieces) {
      const Vector r = x - p.mu;
      v += eta * (p.g.dot(r) + 0.25 * r.dot(p.H * r));
      if (p.bonus) v -= p.bonus->gamma * r.dot(p.bonus->metric * r);
    }
    return v;
  };
  for (int i = 0; i < 50; ++i) {
    const Vector x = oracle::Normal(d, rng);
    const double e = explicit_phi(x);
    CHECK(std::abs(phi(x) - e) <= 1e-7 * std::max(1.0, std::abs(e)));
    CHECK((oracle::FdHessian(explicit_phi, x, 1e-2) - phi.P).norm() <= 1e-6 * phi.P.norm());
  }
}

TEST_CASE("iterate and covariance") {
  const auto pos = PositionedBody::AsIs(BallBody::Unit(2), 0.1);
  AlgoConstants k = ConstantsAdversarial(10000, 2, 0.01);
  SUBCASE("epoch start") {
    EpochState s = EpochState::Fresh(2, k.sigma_sq);
    ComputeIterateAndCovariance(s, pos, k);
    CHECK(s.mu.norm() == 0.0);
    CHECK((s.covariance_factor * s.covariance_factor.transpose() - k.sigma_sq * Matrix::Identity(2, 2)).norm() <=
          1e-12);
  }
  SUBCASE("factor of 2I") {
    EpochState s = EpochState::Fresh(2, k.sigma_sq);
    s.potential.P = 2.0 * Matrix::Identity(2, 2);
    const IterateInfo info = ComputeIterateAndCovariance(s, pos, k);
    CHECK(info.floored == 0);
    CHECK((s.covariance_factor - Matrix::Identity(2, 2) / std::sqrt(2.0)).norm() <= 1e-12);
  }
  SUBCASE("negative eigenvalue is floored") {
    EpochState s = EpochState::Fresh(2, k.sigma_sq);
    s.potential.P(1, 1) = -0.5;
    const IterateInfo info = ComputeIterateAndCovariance(s, pos, k);
    CHECK(info.floored == 1);
    CHECK(s.precision(1, 1) == doctest::Approx(1e-10 / k.sigma_sq).epsilon(1e-9));
    const Matrix sigma = s.covariance_factor * s.covariance_factor.transpose();
    CHECK((sigma * s.precision - Matrix::Identity(2, 2)).norm() <= 1e-8);
  }
}

TEST_CASE("meta-action sampling") {
  const Matrix factor = Matrix::Identity(3, 3);
  Rng rng(5);
  const int n = 100000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = SampleMetaAction(Vector::Zero(3), factor, rng).squaredNorm();
    s1 += r;
    s2 += r * r;
  }
  const double mean = s1 / n;
  CHECK(std::abs(mean - 3.0) <= 3.0 * std::sqrt((s2 / n - mean * mean) / n));

  Rng a(9), b(9);
  CHECK(SampleMetaAction(V({1, 2}), Matrix::Identity(2, 2), a) == SampleMetaAction(V({1, 2}), Matrix::Identity(2, 2), b));

  auto gen = oracle::MakeRng(6);
  const Matrix sigma = oracle::SpdMatrix(3, 0.2, 2.0, gen);
  const Matrix root = Eigen::LLT<Matrix>(sigma).matrixL();
  Matrix acc = Matrix::Zero(3, 3);
  Vector mean_acc = Vector::Zero(3);
  const Vector mu = V({1, -1, 0.5});
  for (int i = 0; i < n; ++i) {
    const Vector x = SampleMetaAction(mu, root, rng) - mu;
    acc += x * x.transpose();
    mean_acc += x;
  }
  const Vector m = mean_acc / n;
  const Matrix cov = acc / n - m * m.transpose();
  CHECK((cov - sigma).norm() <= 0.05 * sigma.norm());
}

TEST_CASE("focus regions") {
  const auto pos = PositionedBody::AsIs(BallBody::Unit(2), 0.1);
  const AlgoConstants k = ConstantsStochastic(500, 2, 0.01, 1.0);
  Rng rng(7);
  long rounds_seen = 0;
  RunOptions opts;
  opts.observer = [&](const RoundDetail& r) {
    ++rounds_seen;
    CHECK(r.state.focus.size() == static_cast<std::size_t>(r.record.t));
    const auto& last = r.state.focus.back();
    CHECK(last.center == r.state.mu);
    CHECK(last.Value(r.state.mu) == 0.0);
    CHECK(last.radius_sq == k.F_max);
  };
  const BanditQuery q = [](long, const Vector& a, Rng&) { return 0.5 * a.squaredNorm(); };
  Run(q, pos, k, rng, opts);
  CHECK(rounds_seen == 500);
}

TEST_CASE("compute_z") {
  BonusLedger ledger(2);
  CHECK(ComputeZ(ledger, V({0.3, 0.1})) == V({0.3, 0.1}));
  ledger.Append(V({0.2, -0.1}), Matrix::Identity(2, 2) * 3.0, 0.01);
  CHECK((ComputeZ(ledger, Vector::Zero(2)) - V({0.2, -0.1})).norm() <= 1e-15);

  BonusLedger two(2);
  two.Append(V({0, 0}), Matrix::Identity(2, 2), 0.01);
  two.Append(V({2, 0}), Matrix::Identity(2, 2), 0.01);
  CHECK((ComputeZ(two, Vector::Zero(2)) - V({1, 0})).norm() <= 1e-15);

  BonusLedger one(1);
  one.Append(V({0}), Matrix::Identity(1, 1), 0.01);
  one.Append(V({4}), 3.0 * Matrix::Identity(1, 1), 0.01);
  const double z = ComputeZ(one, V({0}))(0);
  CHECK(z == doctest::Approx(3.0).epsilon(1e-15));
  // Numerical minimiser of (z - 0)^2 + 3 (z - 4)^2 by golden section.
  double lo = -10.0, hi = 10.0;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [](double x) { return x * x + 3.0 * (x - 4.0) * (x - 4.0); };
  for (int i = 0; i < 200; ++i) {
    const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    (f(a) < f(b) ? hi : lo) = f(a) < f(b) ? b : a;
  }
  CHECK(z == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-8));
}

TEST_CASE("bonus decision branches") {
  const Matrix P = 4.0 * Matrix::Identity(2, 2);
  const double F = 32.0;
  SUBCASE("empty ledger fires through the domination branch") {
    BonusLedger ledger(2);
    const Vector mu = V({0.1, 0.2});
    const BonusDecision dec = DecideBonus(ledger, ComputeZ(ledger, mu), mu, P, F);
    CHECK(dec.fire);
    CHECK(dec.branch == BonusBranch::kNotDominated);
  }
  SUBCASE("dispersed ledger") {
    BonusLedger ledger(2);
    ledger.Append(V({-2, 0}), P, 0.1);
    ledger.Append(V({2, 0}), P, 0.1);
    // z = 0, dispersion 2 * 4 * 4 = 32 >= F / 24
    const BonusDecision dec = DecideBonus(ledger, ComputeZ(ledger, Vector::Zero(2)), Vector::Zero(2), P, F);
    CHECK_FALSE(dec.fire);
    CHECK(dec.branch == BonusBranch::kDispersed);
  }
  SUBCASE("dominated and close") {
    BonusLedger ledger(2);
    ledger.Append(V({0.1, 0}), P, 0.1);
    ledger.Append(V({0.1, 0.05}), P, 0.1);
    const Vector mu = V({0.12, 0.02});
    const BonusDecision dec = DecideBonus(ledger, ComputeZ(ledger, mu), mu, P, F);
    CHECK_FALSE(dec.fire);
    CHECK(dec.branch == BonusBranch::kNone);
  }
  SUBCASE("dominated but far from z") {
    BonusLedger ledger(2);
    ledger.Append(V({0, 0}), 0.01 * Matrix::Identity(2, 2), 0.1);
    ledger.Append(V({0, 0}), P, 0.1);
    // ||mu - z||^2_P = 4 * 9 = 36 >= F / 3
    const Vector mu = V({3, 0});
    const BonusDecision dec = DecideBonus(ledger, ComputeZ(ledger, mu), mu, P, F);
    CHECK(dec.fire);
    CHECK(dec.branch == BonusBranch::kFarFromCenter);
  }
}

TEST_CASE("ledger weight") {
  BonusLedger ledger(1);
  const double gamma = 0.0122428;
  for (int m = 1; m <= 20; ++m) {
    ledger.Append(V({0}), Matrix::Identity(1, 1), gamma);
    CHECK(ledger.m == m);
    CHECK(ledger.m == static_cast<int>(ledger.entries.size()));
    double w = 1.0;
    for (int i = 0; i < m; ++i) w *= 1.0 - 2.0 * gamma;
    CHECK(ledger.w == doctest::Approx(w).epsilon(1e-14));
    CHECK(ledger.w > 0.0);
    CHECK(ledger.w <= 1.0);
  }
}

TEST_CASE("restart test") {
  const auto base = PositionedBody::AsIs(BallBody::Unit(2), 0.1);
  const AlgoConstants k = ConstantsAdversarial(10000, 2, 0.01);
  const PositionedBody pos = base.WithEpsilon(k.epsilon);
  SUBCASE("zero observations never restart") {
    Rng rng(1);
    const EpochState s = SimulateEpoch(k, pos, 10, 0.0, rng);
    const RestartCheck rc = RestartTest(s, k, pos);
    CHECK_FALSE(rc.restart);
    CHECK(rc.certificate == 0.0);
    const RestartStatistic st = ComputeRestartStatistic(s, k, pos);
    CHECK(st.statistic == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(st.statistic > -st.threshold);
  }
  SUBCASE("threshold formula") {
    const double expected = 160.0 * k.F_max / (4.0 * std::pow(k.L, 2.5)) + k.gamma * k.F_max / 32.0;
    CHECK(RestartThreshold(k) == doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("single round against the grid oracle") {
    Rng rng(2);
    const EpochState s = SimulateEpoch(k, pos, 1, 1.0, rng);
    const RestartStatistic st = ComputeRestartStatistic(s, k, pos);
    auto g = [&](const oracle::Vec& y) { return OracleG(s, k, y, true); };
    auto feasible = [&](const oracle::Vec& y) { return InFocus(s, pos, y); };
    const auto grid = oracle::GridMin2D(g, feasible, 1.0 - k.epsilon);
    CHECK(st.min_value == doctest::Approx(grid.second).epsilon(1e-4));
    CHECK(std::abs(st.min_value - grid.second) <= 1e-4);
  }
  SUBCASE("convexification never lowers the minimum") {
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
      const EpochState s = SimulateEpoch(k, pos, 2 + 5 * trial, 1.5, rng);
      const RestartStatistic st = ComputeRestartStatistic(s, k, pos);
      auto raw = [&](const oracle::Vec& y) { return OracleG(s, k, y, false); };
      auto feasible = [&](const oracle::Vec& y) { return InFocus(s, pos, y); };
      const auto grid = oracle::GridMin2D(raw, feasible, 1.0 - k.epsilon, 60, 120);
      CHECK(st.min_value >= grid.second - 1e-9);
    }
  }
}

TEST_CASE("run") {
  const auto pos = PositionedBody::AsIs(BallBody::Unit(2), 0.1);
  const BanditQuery q = [](long, const Vector& a, Rng&) { return 0.25 * (a - V({0.3, -0.2})).squaredNorm(); };
  SUBCASE("empty horizon") {
    AlgoConstants k = ConstantsStochastic(10, 2, 0.01, 1.0);
    k.n = 0;
    Rng rng(1);
    const RegretTrace tr = Run(q, pos, k, rng);
    CHECK(tr.rounds.empty());
    CHECK(tr.diagnostics.restarts == 0);
    CHECK_FALSE(tr.diagnostics.fault);
  }
  SUBCASE("stochastic mode has no bonus and no restart") {
    const AlgoConstants k = ConstantsStochastic(2000, 2, 0.01, 1.0);
    Rng rng(2);
    const RegretTrace tr = Run(q, pos, k, rng);
    CHECK(tr.rounds.size() == 2000);
    CHECK(tr.diagnostics.bonuses == 0);
    CHECK(tr.diagnostics.restarts == 0);
    for (const auto& r : tr.rounds) {
      CHECK(r.m == 0);
      CHECK_FALSE(r.restart);
    }
  }
  SUBCASE("adversarial invariants") {
    const AlgoConstants k = ConstantsAdversarial(2000, 2, 0.01);
    const PositionedBody shrunk = pos.WithEpsilon(k.epsilon);
    Rng rng(3);
    double worst_recursion = 0.0;
    double worst_feasibility = 0.0;
    RunOptions opts;
    opts.observer = [&](const RoundDetail& r) {
      if (r.precision == r.potential_before) {
        const Matrix expected = (1.0 - 2.0 * r.gamma_t) * r.potential_before + 0.5 * k.eta * r.estimate.hess;
        worst_recursion = std::max(worst_recursion, (r.potential_after - expected).norm() / expected.norm());
      }
      const Vector& mu = r.state.mu;
      if (!shrunk.InShrunkBody(mu, 1e-7)) worst_feasibility = 1.0;
      for (const auto& c : r.state.focus)
        worst_feasibility = std::max(worst_feasibility, c.Value(mu) - c.radius_sq);
    };
    const RegretTrace tr = Run(q, pos, k, rng, opts);
    CHECK_FALSE(tr.diagnostics.fault);
    CHECK(worst_recursion <= 1e-9);
    CHECK(worst_feasibility <= 1e-7);
    CHECK(tr.rounds.front().bonus);
    CHECK(tr.diagnostics.max_m <= k.d * k.L);
    CHECK(tr.diagnostics.min_w >= 0.5);
  }
  SUBCASE("same seed, same trace") {
    const AlgoConstants k = ConstantsAdversarial(300, 2, 0.01);
    Rng a(4), b(4);
    const RegretTrace ta = Run(q, pos, k, a);
    const RegretTrace tb = Run(q, pos, k, b);
    REQUIRE(ta.rounds.size() == tb.rounds.size());
    for (std::size_t i = 0; i < ta.rounds.size(); ++i) {
      CHECK(ta.rounds[i].X == tb.rounds[i].X);
      CHECK(ta.rounds[i].Y == tb.rounds[i].Y);
    }
  }
  SUBCASE("faults keep the partial trace") {
    const AlgoConstants k = ConstantsStochastic(50, 2, 0.01, 1.0);
    const BanditQuery bad = [](long t, const Vector&, Rng&) { return t < 10 ? 0.5 : std::nan(""); };
    Rng rng(5);
    const RegretTrace tr = Run(bad, pos, k, rng);
    CHECK(tr.diagnostics.fault);
    CHECK(tr.rounds.size() == 9);
  }
}

TEST_CASE("FTRL regret bound on quadratic sequences") {
  auto gen = oracle::MakeRng(8);
  const int d = 3, n = 100;
  const double sigma_sq = 1.0, eta = 0.2;
  const auto pos = PositionedBody::AsIs(BallBody::Unit(d), 0.1);
  for (int inst = 0; inst < 10; ++inst) {
    QuadraticPotential phi = QuadraticPotential::Initial(d, sigma_sq);
    std::vector<Vector> xs, gs;
    std::vector<Matrix> hs;
    double dual = 0.0;
    for (int t = 0; t < n; ++t) {
      QuadraticSolveOptions opts;
      opts.tol = 1e-13;
      const Vector x = MinimizeQuadratic(phi.P, phi.b, pos, {}, opts).x;
      const Vector g = oracle::Normal(d, gen);
      const Matrix root = oracle::Normal(d * d, gen).reshaped(d, d) * 0.4;
      const Matrix H = root * root.transpose();
      PotentialIngest(phi, eta, g, H, x, std::nullopt);
      // f_t(y) = <g, y - x_t> + 1/4 ||y - x_t||^2_H has f_t'(x_t) = g.
      dual += g.dot(phi.P.ldlt().solve(g));
      xs.push_back(x);
      gs.push_back(g);
      hs.push_back(H);
    }
    for (int c = 0; c < 100; ++c) {
      const Vector x = pos.ProjectShrunk(oracle::Normal(d, gen));
      double lhs = 0.0;
      for (int t = 0; t < n; ++t) {
        const Vector r = x - xs[t];
        lhs -= eta * (gs[t].dot(r) + 0.25 * r.dot(hs[t] * r));
      }
      CHECK(lhs <= x.squaredNorm() / (2.0 * sigma_sq) + 2.0 * eta * eta * dual + 1e-6);
    }
  }
}
