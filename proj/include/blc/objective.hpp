#pragma once

// Weighted design objective evaluated through the surrogate, and the
// discovery driver that searches the design box and re-checks the winner
// against the truth model.

#include <vector>

#include "blc/coupler.hpp"
#include "blc/sade.hpp"
#include "blc/surrogate.hpp"

namespace blc {

struct DesignSpec {
  double f0_ghz = 1.0;
  double coupling_target_db = 3.0;
  double phase_target_deg = 90.0;
  double iso_threshold_db = -20.0;
  double rl_threshold_db = -20.0;
  double alpha = 1.0;   // coupling
  double beta = 0.2;    // phase difference
  double gamma = 1.0;   // isolation
  double lambda = 1.0;  // input reflection
  /// Extra frequencies f0 * (1 + offset) where the isolation and
  /// return-loss hinges are also charged.
  std::vector<double> band_offsets;

  void validate() const;
};

struct LossBreakdown {
  double l_cf = 0.0;
  double l_pd = 0.0;
  double l_is = 0.0;
  double l_rc = 0.0;
  double total = 0.0;
};

LossBreakdown loss_terms(const ElectricalVector& pred, const DesignSpec& spec);

/// Surrogate-based objective; +infinity when the prediction is not finite.
double objective_fn(std::span<const double> x, const DesignSpec& spec, const MlpModel& model);

struct ValidationTolerances {
  double coupling_db = 0.25;
  double phase_deg = 1.5;
};

struct ValidationReport {
  Geometry geometry;
  CouplerMetrics achieved;   // truth model
  CouplerMetrics predicted;  // surrogate at f0 (fbw and k0 from the surrogate point only)
  bool coupling_met = false;
  bool phase_met = false;
  bool isolation_met = false;
  bool return_loss_met = false;

  bool all_met() const { return coupling_met && phase_met && isolation_met && return_loss_met; }
};

struct DiscoveryOutcome {
  DiscoveryResult search;
  ValidationReport validation;
};

/// Truth-model check of a geometry at spec.f0 over a sweep of
/// [0.5 f0, 1.5 f0] (201 points, f0 on the grid).
ValidationReport validate_design(const Geometry& g, const DesignSpec& spec, const Substrate& sub,
                                 const ValidationTolerances& tol = {}, const MetricThresholds& thresholds = {});

DiscoveryOutcome discover(const DesignSpec& spec, Topology kind, const MlpModel& model, const SadeConfig& cfg,
                          const Substrate& sub, const Bounds& bounds = {}, const ValidationTolerances& tol = {});

}  // namespace blc
