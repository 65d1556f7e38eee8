#include "bco/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "bco/error.hpp"

namespace bco {

namespace {

[[noreturn]] void ConfigError(const std::string& what) { throw Error(ErrorKind::kConfig, what); }

void CheckKeys(const Json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) ConfigError(where + " must be an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

double GetNumber(const Json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

double GetNumber(const Json& j, const std::string& key, double fallback, const std::string& where) {
  return j.contains(key) ? GetNumber(j, key, where) : fallback;
}

long GetInteger(const Json& j, const std::string& key, long fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) ConfigError(where + "." + key + " must be an integer");
  return v.get<long>();
}

std::string GetString(const Json& j, const std::string& key, const std::string& fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_string()) ConfigError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

std::vector<double> GetVector(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) return {};
  const auto& v = j.at(key);
  if (!v.is_array()) ConfigError(where + "." + key + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) ConfigError(where + "." + key + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::vector<double>> GetMatrix(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) return {};
  const auto& v = j.at(key);
  if (!v.is_array()) ConfigError(where + "." + key + " must be an array of arrays");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    Json row;
    row["r"] = v[i];
    out.push_back(GetVector(row, "r", where + "." + key + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Vector ToVector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix ToMatrix(const std::vector<std::vector<double>>& rows, const std::string& what) {
  if (rows.empty()) ConfigError(what + " is empty");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) ConfigError(what + " has ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

// ---------------------------------------------------------------------------
// Body

BodySpec ParseBody(const Json& j) {
  const std::string where = "body";
  if (!j.is_object()) ConfigError("body must be an object");
  BodySpec b;
  b.kind = GetString(j, "kind", "", where);
  if (b.kind == "ball") {
    CheckKeys(j, where, {"kind", "center", "radius", "dim"});
    b.center = GetVector(j, "center", where);
    b.radius = GetNumber(j, "radius", 1.0, where);
    const long dim = GetInteger(j, "dim", static_cast<long>(b.center.size()), where);
    if (b.center.empty()) b.center.assign(std::max(0L, dim), 0.0);
    if (static_cast<long>(b.center.size()) != dim) ConfigError("body.dim does not match body.center");
    if (b.center.empty()) ConfigError("ball needs dim or center");
    if (!(b.radius > 0.0)) ConfigError("body.radius must be positive");
  } else if (b.kind == "ellipsoid") {
    CheckKeys(j, where, {"kind", "center", "shape"});
    b.center = GetVector(j, "center", where);
    b.shape = GetMatrix(j, "shape", where);
    if (b.center.empty() || b.shape.size() != b.center.size()) ConfigError("ellipsoid needs center and a matching shape");
  } else if (b.kind == "box") {
    CheckKeys(j, where, {"kind", "lo", "hi"});
    b.lo = GetVector(j, "lo", where);
    b.hi = GetVector(j, "hi", where);
    if (b.lo.empty() || b.lo.size() != b.hi.size()) ConfigError("box needs lo and hi of equal length");
  } else if (b.kind == "simplex") {
    CheckKeys(j, where, {"kind", "dim", "scale"});
    b.dim = static_cast<int>(GetInteger(j, "dim", 0, where));
    b.scale = GetNumber(j, "scale", 1.0, where);
    if (b.dim < 1) ConfigError("simplex needs dim >= 1");
  } else if (b.kind == "polytope") {
    CheckKeys(j, where, {"kind", "rows", "interior"});
    if (!j.contains("rows") || !j.at("rows").is_array()) ConfigError("polytope needs rows");
    for (const auto& row : j.at("rows")) {
      CheckKeys(row, "body.rows[]", {"a", "b"});
      b.rows.push_back(GetVector(row, "a", "body.rows[]"));
      b.offsets.push_back(GetNumber(row, "b", "body.rows[]"));
    }
    b.interior = GetVector(j, "interior", where);
    if (b.rows.empty()) ConfigError("polytope needs at least one row");
  } else {
    ConfigError("unknown body kind '" + b.kind + "'");
  }
  return b;
}

Json SerializeBody(const BodySpec& b) {
  Json j;
  j["kind"] = b.kind;
  if (b.kind == "ball") {
    j["center"] = b.center;
    j["radius"] = b.radius;
  } else if (b.kind == "ellipsoid") {
    j["center"] = b.center;
    j["shape"] = b.shape;
  } else if (b.kind == "box") {
    j["lo"] = b.lo;
    j["hi"] = b.hi;
  } else if (b.kind == "simplex") {
    j["dim"] = b.dim;
    j["scale"] = b.scale;
  } else if (b.kind == "polytope") {
    Json rows = Json::array();
    for (std::size_t i = 0; i < b.rows.size(); ++i) rows.push_back(Json{{"a", b.rows[i]}, {"b", b.offsets[i]}});
    j["rows"] = rows;
    if (!b.interior.empty()) j["interior"] = b.interior;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Environment

EnvironmentSpec ParseEnvironment(const Json& j) {
  const std::string where = "environment";
  CheckKeys(j, where,
            {"loss", "center", "center2", "scale", "c", "c2", "pieces", "edges", "source", "sink", "noise", "schedule",
             "seed"});
  EnvironmentSpec e;
  e.loss = GetString(j, "loss", "quadratic", where);
  e.center = GetVector(j, "center", where);
  e.center2 = GetVector(j, "center2", where);
  e.scale = GetNumber(j, "scale", 1.0, where);
  e.c = GetVector(j, "c", where);
  e.c2 = GetVector(j, "c2", where);
  if (j.contains("pieces")) {
    if (!j.at("pieces").is_array()) ConfigError("environment.pieces must be an array");
    for (const auto& piece : j.at("pieces")) {
      CheckKeys(piece, "environment.pieces[]", {"c", "b"});
      e.slopes.push_back(GetVector(piece, "c", "environment.pieces[]"));
      e.offsets.push_back(GetNumber(piece, "b", 0.0, "environment.pieces[]"));
    }
  }
  e.edges = GetMatrix(j, "edges", where);
  e.source = GetVector(j, "source", where);
  e.sink = GetVector(j, "sink", where);
  if (j.contains("noise")) {
    const Json& n = j.at("noise");
    CheckKeys(n, "environment.noise", {"kind", "std", "half_width"});
    e.noise.kind = GetString(n, "kind", "gaussian", "environment.noise");
    e.noise.std = GetNumber(n, "std", 0.1, "environment.noise");
    e.noise.half_width = GetNumber(n, "half_width", 0.0, "environment.noise");
    if (e.noise.kind != "none" && e.noise.kind != "gaussian" && e.noise.kind != "uniform") {
      ConfigError("unknown noise kind '" + e.noise.kind + "'");
    }
  }
  if (j.contains("schedule")) {
    const Json& s = j.at("schedule");
    CheckKeys(s, "environment.schedule", {"kind", "pieces"});
    e.schedule.kind = GetString(s, "kind", "fixed", "environment.schedule");
    e.schedule.pieces = static_cast<int>(GetInteger(s, "pieces", 10, "environment.schedule"));
    static const std::set<std::string> kinds = {"fixed", "switch", "drift", "random"};
    if (!kinds.count(e.schedule.kind)) ConfigError("unknown schedule kind '" + e.schedule.kind + "'");
    if (e.schedule.pieces < 1) ConfigError("environment.schedule.pieces must be positive");
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) ConfigError("environment.seed must be a non-negative integer");
    e.seed = j.at("seed").get<std::uint64_t>();
  }
  static const std::set<std::string> losses = {"quadratic", "linear", "maxlinear", "lovasz-cut"};
  if (!losses.count(e.loss)) ConfigError("unknown loss '" + e.loss + "'");
  return e;
}

Json SerializeEnvironment(const EnvironmentSpec& e) {
  Json j;
  j["loss"] = e.loss;
  if (e.loss == "quadratic") {
    if (!e.center.empty()) j["center"] = e.center;
    if (!e.center2.empty()) j["center2"] = e.center2;
    j["scale"] = e.scale;
  } else if (e.loss == "linear") {
    j["c"] = e.c;
    if (!e.c2.empty()) j["c2"] = e.c2;
  } else if (e.loss == "maxlinear") {
    Json pieces = Json::array();
    for (std::size_t i = 0; i < e.slopes.size(); ++i) pieces.push_back(Json{{"c", e.slopes[i]}, {"b", e.offsets[i]}});
    j["pieces"] = pieces;
  } else if (e.loss == "lovasz-cut") {
    j["edges"] = e.edges;
    if (!e.source.empty()) j["source"] = e.source;
    if (!e.sink.empty()) j["sink"] = e.sink;
  }
  Json noise;
  noise["kind"] = e.noise.kind;
  if (e.noise.kind == "gaussian") noise["std"] = e.noise.std;
  if (e.noise.kind == "uniform") noise["half_width"] = e.noise.half_width;
  j["noise"] = noise;
  Json schedule;
  schedule["kind"] = e.schedule.kind;
  if (e.schedule.kind == "random") schedule["pieces"] = e.schedule.pieces;
  j["schedule"] = schedule;
  if (e.seed) j["seed"] = *e.seed;
  return j;
}

const std::vector<std::string>& ConstantNames() {
  static const std::vector<std::string> names = {"eta", "lambda", "sigma_sq", "gamma", "epsilon", "F_max", "C_log", "M"};
  return names;
}

std::optional<double>& OverrideSlot(ConstantOverrides& o, const std::string& name) {
  if (name == "eta") return o.eta;
  if (name == "lambda") return o.lambda;
  if (name == "sigma_sq") return o.sigma_sq;
  if (name == "gamma") return o.gamma;
  if (name == "epsilon") return o.epsilon;
  if (name == "F_max") return o.F_max;
  if (name == "C_log") return o.C_log;
  if (name == "M") return o.M;
  ConfigError("unknown constant '" + name + "'");
}

Rng SeededRng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), stream};
  return Rng(seq);
}

}  // namespace

int BodySpec::dimension() const {
  if (kind == "ball" || kind == "ellipsoid") return static_cast<int>(center.size());
  if (kind == "box") return static_cast<int>(lo.size());
  if (kind == "simplex") return dim;
  if (kind == "polytope") return rows.empty() ? 0 : static_cast<int>(rows.front().size());
  return 0;
}

BodyPtr BodySpec::Build() const {
  if (kind == "ball") return std::make_shared<BallBody>(ToVector(center), radius);
  if (kind == "ellipsoid") return std::make_shared<EllipsoidBody>(ToVector(center), ToMatrix(shape, "body.shape"));
  if (kind == "box") return std::make_shared<BoxBody>(ToVector(lo), ToVector(hi));
  if (kind == "simplex") return std::make_shared<SimplexBody>(dim, scale);
  if (kind == "polytope") {
    std::optional<Vector> inner;
    if (!interior.empty()) inner = ToVector(interior);
    return std::make_shared<PolytopeBody>(ToMatrix(rows, "body.rows"), ToVector(offsets), inner);
  }
  ConfigError("unknown body kind '" + kind + "'");
}

ExperimentConfig ParseConfig(const Json& j) {
  try {
    CheckKeys(j, "config",
              {"body", "positioning", "positioning_samples", "environment", "mode", "n", "delta", "overrides",
               "replicas", "seed", "output"});
    ExperimentConfig c;
    if (!j.contains("body")) ConfigError("config needs a body");
    c.body = ParseBody(j.at("body"));
    c.positioning = GetString(j, "positioning", "none", "config");
    if (c.positioning != "none" && c.positioning != "isotropic") ConfigError("positioning must be none or isotropic");
    c.positioning_samples = static_cast<int>(GetInteger(j, "positioning_samples", 0, "config"));
    c.environment = j.contains("environment") ? ParseEnvironment(j.at("environment")) : EnvironmentSpec{};
    c.mode = ParseMode(GetString(j, "mode", "stochastic", "config"));
    c.n = GetInteger(j, "n", 1000, "config");
    if (c.n < 0) ConfigError("n must be non-negative");
    c.delta = GetNumber(j, "delta", 0.01, "config");
    if (!(c.delta > 0.0 && c.delta < 1.0)) ConfigError("delta must lie in (0, 1)");
    if (j.contains("overrides")) {
      const Json& o = j.at("overrides");
      CheckKeys(o, "overrides", std::set<std::string>(ConstantNames().begin(), ConstantNames().end()));
      for (const auto& name : ConstantNames()) {
        if (o.contains(name)) OverrideSlot(c.overrides, name) = GetNumber(o, name, "overrides");
      }
    }
    c.replicas = static_cast<int>(GetInteger(j, "replicas", 1, "config"));
    if (c.replicas < 1) ConfigError("replicas must be at least 1");
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned()) ConfigError("seed must be a non-negative integer");
      c.seed = j.at("seed").get<std::uint64_t>();
    }
    c.output = GetString(j, "output", "out", "config");
    return c;
  } catch (const Json::exception& e) {
    ConfigError(std::string("malformed config: ") + e.what());
  }
}

Json SerializeConfig(const ExperimentConfig& c) {
  Json j;
  j["body"] = SerializeBody(c.body);
  j["positioning"] = c.positioning;
  if (c.positioning_samples != 0) j["positioning_samples"] = c.positioning_samples;
  j["environment"] = SerializeEnvironment(c.environment);
  j["mode"] = ToString(c.mode);
  j["n"] = c.n;
  j["delta"] = c.delta;
  Json o = Json::object();
  ConstantOverrides copy = c.overrides;
  for (const auto& name : ConstantNames()) {
    if (const auto& v = OverrideSlot(copy, name)) o[name] = *v;
  }
  j["overrides"] = o;
  j["replicas"] = c.replicas;
  j["seed"] = c.seed;
  j["output"] = c.output;
  return j;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) ConfigError("cannot open config file '" + path + "'");
  try {
    return ParseConfig(Json::parse(in));
  } catch (const Json::exception& e) {
    ConfigError("cannot parse '" + path + "': " + e.what());
  }
}

void ApplyOverride(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) ConfigError("override '" + assignment + "' is not key=value");
  std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  const auto& names = ConstantNames();
  if (std::find(names.begin(), names.end(), key) != names.end()) key = "overrides." + key;

  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::exception&) {
    value = raw;
  }
  Json* node = &j;
  std::stringstream path(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(path, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) ConfigError("override path '" + key + "' crosses a non-object");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = Json::object();
  }
  if (!node->is_object()) ConfigError("override path '" + key + "' crosses a non-object");
  (*node)[parts.back()] = value;
}

// ---------------------------------------------------------------------------
// Preparation

namespace {

Environment BuildEnvironment(const ExperimentConfig& config, const ConvexBody& body, std::optional<CutFunction>& cut) {
  const EnvironmentSpec& e = config.environment;
  const int d = body.dimension();
  const long n = config.n;
  Rng rng = SeededRng(e.seed.value_or(config.seed), 2);

  NoiseModel noise;
  if (e.noise.kind == "gaussian") noise = NoiseModel::Gaussian(e.noise.std);
  if (e.noise.kind == "uniform") noise = NoiseModel::Uniform(e.noise.half_width);

  auto check_dim = [d](const std::vector<double>& v, const std::string& what) {
    if (static_cast<int>(v.size()) != d) ConfigError(what + " must have " + std::to_string(d) + " entries");
  };

  std::vector<LossPtr> pieces;
  std::vector<int> schedule(static_cast<std::size_t>(n), 0);
  const std::string& kind = e.schedule.kind;

  if (e.loss == "quadratic") {
    Vector a = body.InteriorPoint();
    if (!e.center.empty()) {
      check_dim(e.center, "environment.center");
      a = ToVector(e.center);
    }
    Vector a2 = 2.0 * body.InteriorPoint() - a;
    if (!e.center2.empty()) {
      check_dim(e.center2, "environment.center2");
      a2 = ToVector(e.center2);
    }
    if (kind == "fixed") {
      pieces.push_back(MakeQuadratic(body, a, e.scale));
    } else if (kind == "switch" || kind == "drift") {
      if ((a - a2).norm() == 0.0) ConfigError("switch/drift schedules need center2 different from center");
      if (kind == "switch") {
        pieces = {MakeQuadratic(body, a, e.scale), MakeQuadratic(body, a2, e.scale)};
        for (long t = n / 2; t < n; ++t) schedule[t] = 1;
      } else {
        for (long t = 0; t < n; ++t) {
          const double s = n > 1 ? static_cast<double>(t) / static_cast<double>(n - 1) : 0.0;
          pieces.push_back(MakeQuadratic(body, a + s * (a2 - a), e.scale));
          schedule[t] = static_cast<int>(t);
        }
      }
    } else {  // random: centers uniform on K, rounds assigned uniformly
      Vector x = HitAndRunSample(body, body.InteriorPoint(), 300 * d, rng);
      for (int k = 0; k < e.schedule.pieces; ++k) {
        x = HitAndRunSample(body, x, 30 * d, rng);
        pieces.push_back(MakeQuadratic(body, x, e.scale));
      }
      std::uniform_int_distribution<int> pick(0, e.schedule.pieces - 1);
      for (auto& idx : schedule) idx = pick(rng);
    }
  } else if (e.loss == "linear") {
    check_dim(e.c, "environment.c");
    const Vector c = ToVector(e.c);
    if (kind == "fixed") {
      pieces.push_back(MakeLinear(body, c));
    } else if (kind == "switch") {
      Vector c2 = -c;
      if (!e.c2.empty()) {
        check_dim(e.c2, "environment.c2");
        c2 = ToVector(e.c2);
      }
      pieces = {MakeLinear(body, c), MakeLinear(body, c2)};
      for (long t = n / 2; t < n; ++t) schedule[t] = 1;
    } else {
      ConfigError("linear losses support fixed and switch schedules only");
    }
  } else if (e.loss == "maxlinear") {
    if (kind != "fixed") ConfigError("maxlinear losses support the fixed schedule only");
    if (e.slopes.empty()) ConfigError("maxlinear needs pieces");
    for (const auto& s : e.slopes) check_dim(s, "environment.pieces[].c");
    pieces.push_back(MakeMaxLinear(body, ToMatrix(e.slopes, "environment.pieces"), ToVector(e.offsets)));
  } else {  // lovasz-cut
    if (kind != "fixed") ConfigError("lovasz-cut supports the fixed schedule only");
    const auto* box = dynamic_cast<const BoxBody*>(&body);
    if (!box || !box->lo().isZero(0.0) || !(box->hi().array() == 1.0).all()) {
      ConfigError("lovasz-cut needs the box body [0, 1]^d");
    }
    CutFunction f;
    f.d = d;
    for (const auto& edge : e.edges) {
      if (edge.size() != 3) ConfigError("cut edges are [u, v, weight]");
      const int u = static_cast<int>(edge[0]);
      const int v = static_cast<int>(edge[1]);
      if (u < 0 || v < 0 || u >= d || v >= d || u == v || edge[2] < 0.0) ConfigError("invalid cut edge");
      f.edges.push_back(WeightedEdge{u, v, edge[2]});
    }
    if (!e.source.empty()) {
      check_dim(e.source, "environment.source");
      f.source = ToVector(e.source);
    }
    if (!e.sink.empty()) {
      check_dim(e.sink, "environment.sink");
      f.sink = ToVector(e.sink);
    }
    if ((f.source.size() && f.source.minCoeff() < 0.0) || (f.sink.size() && f.sink.minCoeff() < 0.0)) {
      ConfigError("terminal weights must be non-negative");
    }
    cut = f;
    pieces.push_back(MakeLovaszLoss(f, d));
  }
  return Environment(std::move(pieces), std::move(schedule), noise, config.mode);
}

AlgoConstants BuildConstants(const ExperimentConfig& config, int d, double mean_width) {
  const ConstantOverrides& o = config.overrides;
  const long n_formula = std::max(config.n, 1L);
  const double c_log = o.C_log.value_or(1.0);
  AlgoConstants k = config.mode == Mode::kAdversarial
                        ? ConstantsAdversarial(n_formula, d, config.delta, c_log)
                        : ConstantsStochastic(n_formula, d, config.delta, mean_width, c_log);
  k.n = config.n;
  if (o.eta) k.eta = *o.eta;
  if (o.lambda) k.lambda = *o.lambda;
  if (o.sigma_sq) k.sigma_sq = *o.sigma_sq;
  if (o.gamma) k.gamma = *o.gamma;
  if (o.epsilon) k.epsilon = *o.epsilon;
  if (o.F_max) k.F_max = *o.F_max;
  k.Validate();
  return k;
}

}  // namespace

PreparedExperiment Prepare(const ExperimentConfig& config) {
  try {
    BodyPtr body = config.body.Build();
    const int d = body->dimension();
    std::vector<std::string> warnings;

    Rng rng = SeededRng(config.seed, 1);
    PositionedBody pos = config.positioning == "isotropic"
                             ? PositionIsotropic(body, config.positioning_samples, rng)
                             : PositionedBody::AsIs(body);
    if (config.positioning == "none") {
      int violations = 0;
      for (int i = 0; i < 100; ++i) {
        try {
          if (Gauge(pos.body(), RandomUnitVector(d, rng)) > 1.0 + 1e-12) ++violations;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kPositioningViolation) throw;
          ++violations;
        }
      }
      pos.report.inner_ball_violations = violations;
    }
    if (pos.report.inner_ball_violations > 0) {
      warnings.push_back("unit ball not inside the positioned body along " +
                         std::to_string(pos.report.inner_ball_violations) + " of 100 directions");
    }

    double mean_width = 1.0;
    if (config.overrides.M) {
      mean_width = *config.overrides.M;
    } else if (config.mode == Mode::kStochastic) {
      mean_width = std::min(1.0, EstimateMeanWidth(pos, 2000, rng));
    }
    AlgoConstants k = BuildConstants(config, d, mean_width);
    pos = pos.WithEpsilon(k.epsilon).WithMeanWidth(std::max(mean_width, 1.0 / std::sqrt(static_cast<double>(d))));
    for (const auto& w : k.warnings) warnings.push_back(w);

    std::optional<CutFunction> cut;
    Environment env = BuildEnvironment(config, *body, cut);
    Comparator comparator = BestFixedPoint(env, *body);
    return PreparedExperiment{body, pos, std::move(env), std::move(k), std::move(comparator), cut, warnings};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) throw;
    ConfigError(std::string("cannot prepare experiment: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Running

ReplicaResult RunReplica(const PreparedExperiment& prep, const ExperimentConfig& config, int index) {
  ReplicaResult r;
  r.index = index;
  r.seed = config.seed + static_cast<std::uint64_t>(index);
  Rng rng = SeededRng(r.seed, 0);
  r.trace = Run(prep.environment.AsQuery(), prep.positioned, prep.constants, rng);
  std::vector<Vector> actions;
  actions.reserve(r.trace.rounds.size());
  for (const auto& rec : r.trace.rounds) actions.push_back(rec.A);
  r.cum_regret = TrueRegret(prep.environment, actions, prep.comparator.x);
  r.final_regret = r.cum_regret.empty() ? 0.0 : r.cum_regret.back();
  if (prep.cut && !r.trace.rounds.empty()) {
    const double theta = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    r.rounded_set = RoundToSet(r.trace.final_mu, theta);
    r.rounded_value = (*prep.cut)(*r.rounded_set);
  }
  return r;
}

void WriteTraceCsv(const std::string& path, const ReplicaResult& replica) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  out << "epoch,t,Y,pip,m,restart,cum_true_regret,cum_shat_stat\n";
  char line[512];
  for (std::size_t i = 0; i < replica.trace.rounds.size(); ++i) {
    const RoundRecord& r = replica.trace.rounds[i];
    std::snprintf(line, sizeof(line), "%d,%ld,%.17g,%.17g,%d,%d,%.17g,%.17g\n", r.epoch, r.t, r.Y, r.pip, r.m,
                  r.restart ? 1 : 0, replica.cum_regret[i], r.shat_stat);
    out << line;
  }
  if (!out) throw Error(ErrorKind::kIo, "failed while writing '" + path + "'");
}

namespace {

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Json ConstantsJson(const AlgoConstants& k) {
  return Json{{"mode", ToString(k.mode)}, {"n", k.n},         {"d", k.d},           {"delta", k.delta},
              {"C_log", k.C_log},         {"L", k.L},         {"eta", k.eta},       {"lambda", k.lambda},
              {"sigma_sq", k.sigma_sq},   {"gamma", k.gamma}, {"epsilon", k.epsilon}, {"F_max", k.F_max},
              {"M", k.M}};
}

std::vector<double> ToStd(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

ExperimentResult RunExperiment(const ExperimentConfig& config, bool write_files) {
  const PreparedExperiment prep = Prepare(config);

  ExperimentResult result;
  result.replicas.resize(config.replicas);
  // Replicas share nothing mutable, so they can run on any number of workers.
  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), config.replicas));
  if (workers == 1) {
    for (int i = 0; i < config.replicas; ++i) result.replicas[i] = RunReplica(prep, config, i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < config.replicas; i = next++) result.replicas[i] = RunReplica(prep, config, i);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<double> finals;
  double ratio_sum = 0.0;
  Json replicas = Json::array();
  for (const auto& r : result.replicas) {
    const auto& diag = r.trace.diagnostics;
    const double rounds = static_cast<double>(r.trace.rounds.size());
    const double ratio = rounds > 0 ? r.final_regret / std::sqrt(rounds) : 0.0;
    finals.push_back(r.final_regret);
    ratio_sum += ratio;
    result.total_restarts += diag.restarts;
    if (diag.fault) ++result.faults;
    Json rj{{"index", r.index},
            {"seed", r.seed},
            {"rounds", r.trace.rounds.size()},
            {"final_regret", r.final_regret},
            {"reg_over_sqrt_n", ratio},
            {"restarts", diag.restarts},
            {"bonuses", diag.bonuses},
            {"max_m", diag.max_m},
            {"min_w", diag.min_w},
            {"flooring_events", diag.flooring_events},
            {"solver_nonconverged", diag.solver_nonconverged},
            {"max_recursion_error", diag.max_recursion_error},
            {"max_main_text_gap", diag.max_main_text_gap},
            {"final_mu", ToStd(r.trace.final_mu)},
            {"fault", diag.fault}};
    if (diag.fault) rj["fault_message"] = diag.fault_message;
    if (r.rounded_set) {
      rj["rounded_set"] = *r.rounded_set;
      rj["rounded_value"] = *r.rounded_value;
    }
    replicas.push_back(rj);
  }
  const double count = static_cast<double>(result.replicas.size());
  result.mean_final_regret = std::accumulate(finals.begin(), finals.end(), 0.0) / count;
  result.median_final_regret = Median(finals);
  result.mean_reg_over_sqrt_n = ratio_sum / count;

  Json summary;
  summary["config"] = SerializeConfig(config);
  summary["constants"] = ConstantsJson(prep.constants);
  summary["positioning"] = Json{{"samples", prep.positioned.report.samples},
                                {"inner_ball_violations", prep.positioned.report.inner_ball_violations},
                                {"covariance_deviation", prep.positioned.report.covariance_deviation},
                                {"mean_width", prep.positioned.mean_width()}};
  summary["comparator"] = Json{{"x", ToStd(prep.comparator.x)}, {"average_loss", prep.comparator.value}};
  if (prep.cut) {
    const SetMinimum best = BruteForceMinimum(*prep.cut, prep.cut->d);
    summary["set_minimum"] = Json{{"mask", best.mask}, {"value", best.value}};
  }
  summary["mean_final_regret"] = result.mean_final_regret;
  summary["median_final_regret"] = result.median_final_regret;
  summary["mean_reg_over_sqrt_n"] = result.mean_reg_over_sqrt_n;
  summary["total_restarts"] = result.total_restarts;
  summary["faults"] = result.faults;
  summary["warnings"] = prep.warnings;
  summary["replicas"] = replicas;
  result.summary = summary;

  if (write_files) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(config.output, ec);
    if (ec) throw Error(ErrorKind::kIo, "cannot create '" + config.output + "': " + ec.message());
    for (const auto& r : result.replicas) {
      WriteTraceCsv((fs::path(config.output) / ("replica_" + std::to_string(r.index) + ".csv")).string(), r);
    }
    const std::string path = (fs::path(config.output) / "summary.json").string();
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
    out << summary.dump(2) << "\n";
  }
  return result;
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

// Every entry equal, so the vector can be re-sized to another dimension.
std::optional<double> UniformValue(const Json& arr) {
  if (!arr.is_array() || arr.empty()) return std::nullopt;
  const double first = arr.front().get<double>();
  for (const auto& x : arr) {
    if (x.get<double>() != first) return std::nullopt;
  }
  return first;
}

void ResizeField(Json& obj, const std::string& key, int d, const std::string& what) {
  if (!obj.contains(key)) return;
  const auto value = UniformValue(obj.at(key));
  if (!value) ConfigError("a d sweep needs " + what + "." + key + " with identical entries");
  obj[key] = std::vector<double>(d, *value);
}

void SetDimension(Json& j, int d) {
  if (d < 1) ConfigError("d must be positive");
  Json& body = j.at("body");
  const std::string kind = body.value("kind", "");
  if (kind == "ball") {
    ResizeField(body, "center", d, "body");
    body.erase("dim");
    if (!body.contains("center")) body["center"] = std::vector<double>(d, 0.0);
  } else if (kind == "box") {
    ResizeField(body, "lo", d, "body");
    ResizeField(body, "hi", d, "body");
  } else if (kind == "simplex") {
    body["dim"] = d;
  } else {
    ConfigError("a d sweep supports ball, box and simplex bodies");
  }
  if (j.contains("environment")) {
    Json& env = j.at("environment");
    const std::string loss = env.value("loss", "quadratic");
    if (loss != "quadratic" && loss != "linear") ConfigError("a d sweep supports quadratic and linear losses");
    for (const char* key : {"center", "center2", "c", "c2"}) ResizeField(env, key, d, "environment");
  }
}

}  // namespace

std::vector<SweepRow> Sweep(const ExperimentConfig& config, const std::string& axis,
                            const std::vector<std::string>& values, bool write_files) {
  static const std::set<std::string> axes = {"n", "d", "delta", "replicas", "eta", "lambda", "sigma_sq",
                                             "gamma", "epsilon", "F_max", "C_log", "M"};
  if (!axes.count(axis)) ConfigError("unknown sweep axis '" + axis + "'");
  std::vector<SweepRow> rows;
  const Json base = SerializeConfig(config);
  for (const auto& value : values) {
    Json j = base;
    if (axis == "d") {
      try {
        SetDimension(j, std::stoi(value));
      } catch (const std::logic_error&) {
        ConfigError("d sweep value '" + value + "' is not an integer");
      }
    } else {
      ApplyOverride(j, axis + "=" + value);
    }
    ExperimentConfig c = ParseConfig(j);
    c.output = (std::filesystem::path(config.output) / (axis + "_" + value)).string();
    const auto start = std::chrono::steady_clock::now();
    const ExperimentResult res = RunExperiment(c, write_files);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    SweepRow row;
    row.value = value;
    row.mean_regret = res.mean_final_regret;
    row.reg_over_sqrt_n = res.mean_reg_over_sqrt_n;
    row.restarts = static_cast<double>(res.total_restarts) / c.replicas;
    row.runtime_s = elapsed;
    row.faults = res.faults;
    rows.push_back(row);
  }
  if (write_files) {
    std::error_code ec;
    std::filesystem::create_directories(config.output, ec);
    if (ec) throw Error(ErrorKind::kIo, "cannot create '" + config.output + "': " + ec.message());
    WriteSweepCsv((std::filesystem::path(config.output) / ("sweep_" + axis + ".csv")).string(), rows);
  }
  return rows;
}

void WriteSweepCsv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  out << "value,mean_regret,reg_over_sqrt_n,restarts,runtime_s\n";
  char line[512];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%.17g,%.6f\n", r.value.c_str(), r.mean_regret,
                  r.reg_over_sqrt_n, r.restarts, r.runtime_s);
    out << line;
  }
}

}  // namespace bco
