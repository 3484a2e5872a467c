#pragma once

// Self-adaptive differential evolution with two competing strategies
// (rand/1/bin and current-to-best/2/bin). The probability of picking the
// first strategy and the mean crossover rate are re-learned from recent
// successes every learning period.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "blc/coupler.hpp"
#include "blc/random.hpp"

namespace blc {

/// Must be safe to call concurrently.
using ObjectiveFn = std::function<double(std::span<const double>)>;

struct SadeConfig {
  int np = 100;
  int generations = 200;
  int learning_period = 50;
  double crm_init = 0.9;
  double cr_dev = 0.1;
  int cr_refresh = 5;  // generations between per-individual CR redraws
  double f_mean = 0.35;
  double f_dev = 0.1;
  double p_init = 0.5;
  double p_min = 0.05;
  double p_max = 0.95;
  std::uint64_t seed = 1;
  unsigned threads = 1;  // fitness workers; 0 = hardware concurrency

  void validate() const;
};

struct SadeState {
  std::vector<std::vector<double>> population;
  std::vector<double> fitness;
  double strategy_prob = 0.5;
  double cr_mean = 0.5;
  std::vector<double> cr;         // current per-individual crossover rates
  std::vector<double> cr_memory;  // successful CRs in the current learning period
  int ns1 = 0, nf1 = 0, ns2 = 0, nf2 = 0;
  int generation = 0;
  std::vector<double> best_x;
  double best_f = 0.0;
  Engine rng;
};

struct DiscoveryResult {
  std::vector<double> x_star;
  double f_star = 0.0;
  std::vector<double> history;  // best-ever fitness after init and each generation
  std::vector<std::vector<double>> final_population;
  std::vector<double> final_fitness;
};

/// Strategy-1 probability learned from one period's success/failure
/// counts, clamped to [p_min, p_max]; `current` when nothing was tried.
double learned_strategy_probability(int ns1, int nf1, int ns2, int nf2, double current, const SadeConfig& cfg);

/// Maps v back into [lo, hi] by mirroring at the violated bound.
double reflect_into(double v, double lo, double hi);

std::vector<std::vector<double>> init_population(const Bounds& b, int np, std::uint64_t seed);

/// Initial population evaluated and adaptation state reset.
SadeState init_state(const ObjectiveFn& objective, const SadeConfig& cfg, const Bounds& b);

/// One generation: mutation, crossover, selection, then adaptation
/// bookkeeping at the end of every learning period.
void step(SadeState& state, const ObjectiveFn& objective, const SadeConfig& cfg, const Bounds& b);

DiscoveryResult run(const ObjectiveFn& objective, const Bounds& b, const SadeConfig& cfg);

}  // namespace blc
