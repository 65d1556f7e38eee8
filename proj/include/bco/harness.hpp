#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bco/environments.hpp"
#include "bco/geometry.hpp"
#include "bco/ons.hpp"

namespace bco {

using Json = nlohmann::ordered_json;

struct BodySpec {
  std::string kind = "ball";
  std::vector<double> center;              // ball, ellipsoid
  double radius = 1.0;                     // ball
  std::vector<std::vector<double>> shape;  // ellipsoid
  std::vector<double> lo, hi;              // box
  int dim = 0;                             // ball (when center omitted), simplex
  double scale = 1.0;                      // simplex
  std::vector<std::vector<double>> rows;   // polytope a_i
  std::vector<double> offsets;             // polytope b_i
  std::vector<double> interior;            // polytope, optional

  int dimension() const;
  BodyPtr Build() const;
};

struct NoiseSpec {
  std::string kind = "gaussian";
  double std = 0.1;
  double half_width = 0.0;
};

struct ScheduleSpec {
  std::string kind = "fixed";  // fixed | switch | drift | random
  int pieces = 10;             // random
};

struct EnvironmentSpec {
  std::string loss = "quadratic";
  std::vector<double> center;   // quadratic; empty means the body's interior point
  std::vector<double> center2;  // quadratic, second comparator for switch/drift
  double scale = 1.0;
  std::vector<double> c;   // linear
  std::vector<double> c2;  // linear, switch
  std::vector<std::vector<double>> slopes;  // maxlinear
  std::vector<double> offsets;
  std::vector<std::vector<double>> edges;  // lovasz-cut: [u, v, weight]
  std::vector<double> source, sink;
  NoiseSpec noise;
  ScheduleSpec schedule;
  std::optional<std::uint64_t> seed;  // defaults to the experiment seed
};

struct ConstantOverrides {
  std::optional<double> eta, lambda, sigma_sq, gamma, epsilon, F_max, C_log, M;
};

struct ExperimentConfig {
  BodySpec body;
  std::string positioning = "none";  // none | isotropic
  int positioning_samples = 0;       // 0 selects 50 d^2
  EnvironmentSpec environment;
  Mode mode = Mode::kStochastic;
  long n = 1000;
  double delta = 0.01;
  ConstantOverrides overrides;
  int replicas = 1;
  std::uint64_t seed = 0;
  std::string output = "out";
};

// Throws Error(kConfig) with a message naming the offending field.
ExperimentConfig ParseConfig(const Json& j);
Json SerializeConfig(const ExperimentConfig& config);
ExperimentConfig LoadConfig(const std::string& path);

// key=value with a dotted path into the config JSON; bare constant names
// (eta, lambda, ...) address the overrides block. The value is parsed as JSON
// when possible and kept as a string otherwise.
void ApplyOverride(Json& j, const std::string& assignment);

struct PreparedExperiment {
  BodyPtr body;
  PositionedBody positioned;
  Environment environment;
  AlgoConstants constants;
  Comparator comparator;
  std::optional<CutFunction> cut;
  std::vector<std::string> warnings;
};

PreparedExperiment Prepare(const ExperimentConfig& config);

struct ReplicaResult {
  int index = 0;
  std::uint64_t seed = 0;
  RegretTrace trace;
  std::vector<double> cum_regret;
  double final_regret = 0.0;
  std::optional<std::uint32_t> rounded_set;  // lovasz-cut only
  std::optional<double> rounded_value;
};

struct ExperimentResult {
  std::vector<ReplicaResult> replicas;
  Json summary;
  double mean_final_regret = 0.0;
  double median_final_regret = 0.0;
  double mean_reg_over_sqrt_n = 0.0;
  int total_restarts = 0;
  int faults = 0;
};

ReplicaResult RunReplica(const PreparedExperiment& prep, const ExperimentConfig& config, int index);

// Runs all replicas, writes replica_<i>.csv and summary.json under
// config.output when write_files is set.
ExperimentResult RunExperiment(const ExperimentConfig& config, bool write_files = true);

void WriteTraceCsv(const std::string& path, const ReplicaResult& replica);

struct SweepRow {
  std::string value;
  double mean_regret = 0.0;
  double reg_over_sqrt_n = 0.0;
  double restarts = 0.0;
  double runtime_s = 0.0;
  int faults = 0;
};

// axis: n | d | delta | replicas | any constant override name.
std::vector<SweepRow> Sweep(const ExperimentConfig& config, const std::string& axis,
                            const std::vector<std::string>& values, bool write_files = true);

void WriteSweepCsv(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace bco
