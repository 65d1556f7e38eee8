// Command-line front end: run experiments, sweeps and self-checks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bco/diagnostics.hpp"
#include "bco/error.hpp"
#include "bco/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitFault = 3;
constexpr int kExitIo = 1;

bco::ExperimentConfig ResolveConfig(const std::string& path, const std::vector<std::string>& overrides,
                                    const std::string& out) {
  std::ifstream in(path);
  if (!in) throw bco::Error(bco::ErrorKind::kConfig, "cannot open config file '" + path + "'");
  bco::Json j;
  try {
    j = bco::Json::parse(in);
  } catch (const bco::Json::exception& e) {
    throw bco::Error(bco::ErrorKind::kConfig, "cannot parse '" + path + "': " + e.what());
  }
  for (const auto& o : overrides) bco::ApplyOverride(j, o);
  if (!out.empty()) j["output"] = out;
  return bco::ParseConfig(j);
}

std::vector<std::string> SplitValues(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void PrintWarnings(const bco::Json& summary) {
  for (const auto& w : summary.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << "\n";
}

int Dispatch(int argc, char** argv) {
  CLI::App app{"Bandit convex optimization experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;

  auto* run = app.add_subcommand("run", "run one experiment (all replicas)");
  run->add_option("--config", config_path, "experiment JSON")->required();
  run->add_option("--override", overrides, "key=value, dotted paths allowed");
  run->add_option("--out", out, "output directory");

  std::string axis;
  std::string values;
  auto* sweep = app.add_subcommand("sweep", "repeat an experiment over one axis");
  sweep->add_option("--config", config_path, "experiment JSON")->required();
  sweep->add_option("--axis", axis, "n, d, delta, replicas or a constant name")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--override", overrides, "key=value, dotted paths allowed");
  sweep->add_option("--out", out, "output directory");

  std::string suite;
  std::uint64_t seed = 1;
  auto* diag = app.add_subcommand("diag", "run a property self-check");
  diag->add_option("suite", suite, "gauge | unbiasedness | ftrl")
      ->required()
      ->check(CLI::IsMember({"gauge", "unbiasedness", "ftrl"}));
  diag->add_option("--seed", seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*run) {
    const bco::ExperimentConfig config = ResolveConfig(config_path, overrides, out);
    const bco::ExperimentResult result = bco::RunExperiment(config);
    PrintWarnings(result.summary);
    std::printf("replicas %d  mean regret %.6g  median regret %.6g  mean Reg/sqrt(n) %.6g  restarts %d  faults %d\n",
                config.replicas, result.mean_final_regret, result.median_final_regret, result.mean_reg_over_sqrt_n,
                result.total_restarts, result.faults);
    std::printf("wrote %s\n", config.output.c_str());
    for (const auto& r : result.replicas) {
      if (r.trace.diagnostics.fault) {
        std::fprintf(stderr, "replica %d fault: %s\n", r.index, r.trace.diagnostics.fault_message.c_str());
      }
    }
    return result.faults > 0 ? kExitFault : 0;
  }
  if (*sweep) {
    const bco::ExperimentConfig config = ResolveConfig(config_path, overrides, out);
    const auto rows = bco::Sweep(config, axis, SplitValues(values));
    std::printf("value,mean_regret,reg_over_sqrt_n,restarts,runtime_s\n");
    int faults = 0;
    for (const auto& r : rows) {
      std::printf("%s,%.6g,%.6g,%.3g,%.3f\n", r.value.c_str(), r.mean_regret, r.reg_over_sqrt_n, r.restarts,
                  r.runtime_s);
      faults += r.faults;
    }
    return faults > 0 ? kExitFault : 0;
  }
  bco::DiagReport report;
  if (suite == "gauge") report = bco::DiagGauge(seed);
  if (suite == "unbiasedness") report = bco::DiagUnbiasedness(seed);
  if (suite == "ftrl") report = bco::DiagFtrl(seed);
  for (const auto& line : report.lines) std::printf("%s\n", line.c_str());
  std::printf("%s %s\n", report.name.c_str(), report.passed ? "PASS" : "FAIL");
  return report.passed ? 0 : kExitFault;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Dispatch(argc, argv);
  } catch (const bco::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.kind()) {
      case bco::ErrorKind::kConfig:
      case bco::ErrorKind::kInvalidInput:
        return kExitConfig;
      case bco::ErrorKind::kIo:
        return kExitIo;
      default:
        return kExitFault;
    }
  }
}
