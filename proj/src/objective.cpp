#include "blc/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "blc/dataset.hpp"
#include "blc/error.hpp"

namespace blc {

void DesignSpec::validate() const {
  std::ostringstream os;
  if (!(f0_ghz > 0.0) || !std::isfinite(f0_ghz)) os << " f0 must be > 0;";
  if (!std::isfinite(coupling_target_db)) os << " coupling target must be finite;";
  if (!std::isfinite(phase_target_deg)) os << " phase target must be finite;";
  if (!std::isfinite(iso_threshold_db) || !std::isfinite(rl_threshold_db)) os << " thresholds must be finite;";
  for (double w : {alpha, beta, gamma, lambda}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      os << " weights must be finite and >= 0;";
      break;
    }
  }
  if (!(alpha > 0.0 || beta > 0.0 || gamma > 0.0 || lambda > 0.0)) os << " at least one weight must be > 0;";
  for (double o : band_offsets) {
    if (!(o > -1.0) || !std::isfinite(o)) {
      os << " band offsets must be > -1;";
      break;
    }
  }
  if (!os.str().empty()) throw Error(ErrorKind::Config, "invalid design spec:" + os.str());
}

LossBreakdown loss_terms(const ElectricalVector& pred, const DesignSpec& spec) {
  LossBreakdown l;
  l.l_cf = std::abs(-pred[kS31Db] - spec.coupling_target_db);
  l.l_pd = std::abs(wrap_degrees((pred[kPh21Deg] - pred[kPh31Deg]) - spec.phase_target_deg));
  l.l_is = std::max(0.0, pred[kS41Db] - spec.iso_threshold_db);
  l.l_rc = std::max(0.0, pred[kS11Db] - spec.rl_threshold_db);
  l.total = spec.alpha * l.l_cf + spec.beta * l.l_pd + spec.gamma * l.l_is + spec.lambda * l.l_rc;
  return l;
}

double objective_fn(std::span<const double> x, const DesignSpec& spec, const MlpModel& model) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const auto finite = [](const ElectricalVector& v) {
    return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
  };
  const ElectricalVector center = predict(model, x, spec.f0_ghz);
  if (!finite(center)) return kInf;
  double total = loss_terms(center, spec).total;
  for (double offset : spec.band_offsets) {
    const ElectricalVector p = predict(model, x, spec.f0_ghz * (1.0 + offset));
    if (!finite(p)) return kInf;
    const LossBreakdown l = loss_terms(p, spec);
    total += spec.gamma * l.l_is + spec.lambda * l.l_rc;
  }
  return std::isfinite(total) ? total : kInf;
}

ValidationReport validate_design(const Geometry& g, const DesignSpec& spec, const Substrate& sub,
                                 const ValidationTolerances& tol, const MetricThresholds& thresholds) {
  const FrequencySweep sweep{0.5 * spec.f0_ghz, 1.5 * spec.f0_ghz, 201};
  const FourPortResponse resp = simulate(g, sub, sweep, std::vector<Interval>(default_bounds(topology_of(g)).size(),
                                                                                 {-std::numeric_limits<double>::max(),
                                                                                  std::numeric_limits<double>::max()}));
  ValidationReport r;
  r.geometry = g;
  r.achieved = metrics(resp, spec.f0_ghz, thresholds);
  r.coupling_met = std::abs(r.achieved.coupling_db - spec.coupling_target_db) <= tol.coupling_db;
  r.phase_met = std::abs(wrap_degrees(r.achieved.phase_diff_deg - spec.phase_target_deg)) <= tol.phase_deg;
  r.isolation_met = r.achieved.isolation_db <= spec.iso_threshold_db;
  r.return_loss_met = r.achieved.return_loss_db <= spec.rl_threshold_db;
  return r;
}

DiscoveryOutcome discover(const DesignSpec& spec, Topology kind, const MlpModel& model, const SadeConfig& cfg,
                          const Substrate& sub, const Bounds& bounds_in, const ValidationTolerances& tol) {
  spec.validate();
  if (model.topology != kind) {
    throw Error(ErrorKind::TopologyMismatch, "model was trained for the " + std::string(to_string(model.topology)) +
                                                 " topology but discovery targets " + std::string(to_string(kind)));
  }
  if (kind == Topology::Classical) throw Error(ErrorKind::Config, "discovery runs on folded or cascaded geometries");
  const Bounds bounds = bounds_in.empty() ? default_bounds(kind) : bounds_in;
  if (bounds.size() != parameter_count(kind)) throw Error(ErrorKind::Shape, "bounds dimension does not match topology");
  validate_bounds(bounds);

  const ObjectiveFn objective = [&](std::span<const double> x) { return objective_fn(x, spec, model); };
  DiscoveryOutcome out;
  out.search = run(objective, bounds, cfg);
  const Geometry g = vector_to_geometry(kind, out.search.x_star);
  out.validation = validate_design(g, spec, sub, tol);

  const ElectricalVector p = predict(model, out.search.x_star, spec.f0_ghz);
  out.validation.predicted.coupling_db = -p[kS31Db];
  out.validation.predicted.phase_diff_deg = wrap_degrees(p[kPh21Deg] - p[kPh31Deg]);
  out.validation.predicted.isolation_db = p[kS41Db];
  out.validation.predicted.return_loss_db = p[kS11Db];
  out.validation.predicted.k0_db = std::abs(p[kS21Db] - p[kS31Db]);
  return out;
}

}  // namespace blc
