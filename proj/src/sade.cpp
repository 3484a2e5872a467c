#include "blc/sade.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "blc/dataset.hpp"
#include "blc/error.hpp"
#include "blc/parallel.hpp"

namespace blc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sanitize(double f) { return std::isfinite(f) ? f : kInf; }

void evaluate_all(const ObjectiveFn& objective, const std::vector<std::vector<double>>& xs,
                  std::vector<double>& out, unsigned threads) {
  out.assign(xs.size(), kInf);
  parallel_for(xs.size(), threads, [&](std::size_t i) { out[i] = sanitize(objective(xs[i])); });
}

// k mutually distinct indices from [0, np) \ {exclude}.
void pick_distinct(Engine& rng, int np, int exclude, std::span<int> out) {
  for (std::size_t k = 0; k < out.size(); ++k) {
    int r = 0;
    do {
      r = static_cast<int>(rng() % static_cast<std::uint64_t>(np));
    } while (r == exclude || std::find(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k), r) !=
                                 out.begin() + static_cast<std::ptrdiff_t>(k));
    out[k] = r;
  }
}

void redraw_cr(SadeState& s, const SadeConfig& cfg) {
  std::normal_distribution<double> nd(s.cr_mean, cfg.cr_dev);
  for (double& cr : s.cr) cr = std::clamp(nd(s.rng), 0.0, 1.0);
}

void track_best(SadeState& s) {
  const auto it = std::min_element(s.fitness.begin(), s.fitness.end());
  const auto idx = static_cast<std::size_t>(it - s.fitness.begin());
  if (s.best_x.empty() || *it < s.best_f) {
    s.best_f = *it;
    s.best_x = s.population[idx];
  }
}

}  // namespace

void SadeConfig::validate() const {
  if (np < 4) throw Error(ErrorKind::Config, "SaDE population size must be >= 4");
  if (generations < 1) throw Error(ErrorKind::Config, "SaDE needs at least one generation");
  if (learning_period < 1) throw Error(ErrorKind::Config, "learning_period must be >= 1");
  if (cr_refresh < 1) throw Error(ErrorKind::Config, "cr_refresh must be >= 1");
  if (!(crm_init >= 0.0 && crm_init <= 1.0)) throw Error(ErrorKind::Config, "crm_init must lie in [0, 1]");
  if (!(f_mean > 0.0) || !(f_dev >= 0.0) || !(cr_dev >= 0.0)) {
    throw Error(ErrorKind::Config, "invalid mutation/crossover distribution parameters");
  }
  if (!(p_min > 0.0 && p_min <= p_init && p_init <= p_max && p_max < 1.0)) {
    throw Error(ErrorKind::Config, "need 0 < p_min <= p_init <= p_max < 1");
  }
}

double learned_strategy_probability(int ns1, int nf1, int ns2, int nf2, double current, const SadeConfig& cfg) {
  const double num = static_cast<double>(ns1) * (ns2 + nf2);
  const double den = static_cast<double>(ns2) * (ns1 + nf1) + num;
  if (!(den > 0.0)) return current;
  return std::clamp(num / den, cfg.p_min, cfg.p_max);
}

double reflect_into(double v, double lo, double hi) {
  if (v >= lo && v <= hi) return v;
  const double width = hi - lo;
  if (!(width > 0.0) || !std::isfinite(v)) return std::clamp(std::isfinite(v) ? v : lo, lo, hi);
  // Mirror repeatedly; equivalent to folding onto a period of 2*width.
  double t = std::fmod(v - lo, 2.0 * width);
  if (t < 0.0) t += 2.0 * width;
  const double r = t <= width ? lo + t : hi - (t - width);
  return std::clamp(r, lo, hi);
}

std::vector<std::vector<double>> init_population(const Bounds& b, int np, std::uint64_t seed) {
  validate_bounds(b);
  if (np < 4) throw Error(ErrorKind::Config, "SaDE population size must be >= 4");
  Engine eng(derive_seed({seed, 0x504f50ULL}));
  std::vector<std::vector<double>> pop(static_cast<std::size_t>(np), std::vector<double>(b.size()));
  for (auto& x : pop) {
    for (std::size_t d = 0; d < b.size(); ++d) x[d] = std::clamp(uniform(eng, b[d].lo, b[d].hi), b[d].lo, b[d].hi);
  }
  return pop;
}

SadeState init_state(const ObjectiveFn& objective, const SadeConfig& cfg, const Bounds& b) {
  cfg.validate();
  SadeState s;
  s.population = init_population(b, cfg.np, cfg.seed);
  s.rng = Engine(derive_seed({cfg.seed, 0x53414445ULL}));
  s.strategy_prob = cfg.p_init;
  s.cr_mean = cfg.crm_init;
  s.cr.assign(static_cast<std::size_t>(cfg.np), cfg.crm_init);
  redraw_cr(s, cfg);
  evaluate_all(objective, s.population, s.fitness, cfg.threads);
  track_best(s);
  return s;
}

void step(SadeState& s, const ObjectiveFn& objective, const SadeConfig& cfg, const Bounds& b) {
  const int np = static_cast<int>(s.population.size());
  const std::size_t dim = b.size();
  if (np != cfg.np || s.fitness.size() != s.population.size() || s.cr.size() != s.population.size()) {
    throw Error(ErrorKind::Config, "SaDE state does not match its configuration");
  }
  if (s.generation > 0 && s.generation % cfg.cr_refresh == 0) redraw_cr(s, cfg);

  const auto best_idx = static_cast<std::size_t>(std::min_element(s.fitness.begin(), s.fitness.end()) - s.fitness.begin());
  const std::vector<double>& best = s.population[best_idx];

  std::normal_distribution<double> f_dist(cfg.f_mean, cfg.f_dev);
  std::vector<std::vector<double>> trials(static_cast<std::size_t>(np), std::vector<double>(dim));
  std::vector<int> strategy(static_cast<std::size_t>(np));

  for (int i = 0; i < np; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const std::vector<double>& xi = s.population[ui];
    double f = 0.0;
    for (int tries = 0; tries < 64 && !(f > 0.0); ++tries) f = f_dist(s.rng);
    if (!(f > 0.0)) f = cfg.f_mean;
    f = std::min(f, 2.0);

    std::vector<double> mutant(dim);
    if (uniform01(s.rng) < s.strategy_prob) {
      strategy[ui] = 1;
      std::array<int, 3> r{};
      pick_distinct(s.rng, np, i, r);
      for (std::size_t d = 0; d < dim; ++d) {
        mutant[d] = s.population[r[0]][d] + f * (s.population[r[1]][d] - s.population[r[2]][d]);
      }
    } else {
      strategy[ui] = 2;
      std::array<int, 4> r{};
      if (np >= 5) {
        pick_distinct(s.rng, np, i, r);
      } else {
        pick_distinct(s.rng, np, i, std::span<int>(r).first(2));
        pick_distinct(s.rng, np, i, std::span<int>(r).last(2));
      }
      for (std::size_t d = 0; d < dim; ++d) {
        mutant[d] = xi[d] + f * (best[d] - xi[d]) + f * (s.population[r[0]][d] - s.population[r[1]][d]) +
                    f * (s.population[r[2]][d] - s.population[r[3]][d]);
      }
    }

    const auto j_rand = static_cast<std::size_t>(s.rng() % dim);
    for (std::size_t d = 0; d < dim; ++d) {
      const double v = (d == j_rand || uniform01(s.rng) < s.cr[ui]) ? mutant[d] : xi[d];
      trials[ui][d] = reflect_into(v, b[d].lo, b[d].hi);
    }
  }

  std::vector<double> trial_fitness;
  evaluate_all(objective, trials, trial_fitness, cfg.threads);

  for (int i = 0; i < np; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const bool improved = trial_fitness[ui] < s.fitness[ui];
    if (improved) {
      s.population[ui] = std::move(trials[ui]);
      s.fitness[ui] = trial_fitness[ui];
      s.cr_memory.push_back(s.cr[ui]);
    }
    if (strategy[ui] == 1) {
      (improved ? s.ns1 : s.nf1)++;
    } else {
      (improved ? s.ns2 : s.nf2)++;
    }
  }
  track_best(s);
  ++s.generation;

  if (s.generation % cfg.learning_period == 0) {
    s.strategy_prob = learned_strategy_probability(s.ns1, s.nf1, s.ns2, s.nf2, s.strategy_prob, cfg);
    if (!s.cr_memory.empty()) {
      s.cr_mean = std::accumulate(s.cr_memory.begin(), s.cr_memory.end(), 0.0) /
                  static_cast<double>(s.cr_memory.size());
    }
    s.cr_memory.clear();
    s.ns1 = s.nf1 = s.ns2 = s.nf2 = 0;
  }
}

DiscoveryResult run(const ObjectiveFn& objective, const Bounds& b, const SadeConfig& cfg) {
  cfg.validate();
  validate_bounds(b);
  SadeState s = init_state(objective, cfg, b);
  DiscoveryResult out;
  out.history.reserve(static_cast<std::size_t>(cfg.generations) + 1);
  out.history.push_back(s.best_f);
  for (int g = 0; g < cfg.generations; ++g) {
    step(s, objective, cfg, b);
    out.history.push_back(s.best_f);
  }
  out.x_star = s.best_x;
  out.f_star = s.best_f;
  out.final_population = std::move(s.population);
  out.final_fitness = std::move(s.fitness);
  return out;
}

}  // namespace blc
