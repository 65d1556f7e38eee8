#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bco {

// Self-checks behind `bco diag`. Each prints nothing; the CLI reports lines.
struct DiagReport {
  std::string name;
  bool passed = true;
  std::vector<std::string> lines;
};

// Closed-form vs bisection gauge, homogeneity and subadditivity.
DiagReport DiagGauge(std::uint64_t seed, int points = 1000);

// Monte Carlo means of the estimator against the closed-form surrogate.
DiagReport DiagUnbiasedness(std::uint64_t seed, long draws = 200000);

// Regret of FTRL on random quadratic sequences against the standard bound.
DiagReport DiagFtrl(std::uint64_t seed, int instances = 20, int rounds = 100);

}  // namespace bco
