#include "blc/coupler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "blc/error.hpp"

namespace blc {

std::string_view to_string(Topology t) noexcept {
  switch (t) {
    case Topology::Classical: return "classical";
    case Topology::Folded: return "folded";
    case Topology::Cascaded: return "cascaded";
  }
  return "unknown";
}

Topology topology_from_string(std::string_view name) {
  if (name == "classical") return Topology::Classical;
  if (name == "folded") return Topology::Folded;
  if (name == "cascaded") return Topology::Cascaded;
  throw Error(ErrorKind::Config, "unknown topology '" + std::string(name) +
                                     "' (expected classical, folded or cascaded)");
}

Topology topology_of(const Geometry& g) noexcept {
  return static_cast<Topology>(g.index());
}

Bounds default_bounds(Topology t) {
  switch (t) {
    case Topology::Classical:
      return {{0.05, 10.0}, {0.05, 10.0}};
    case Topology::Folded:
      return {{1.5, 3.0}, {5.0, 12.0}, {0.3, 2.0}, {0.1, 2.0}, {1.2, 1.8}};
    case Topology::Cascaded:
      return {{3.5, 5.0}, {20.0, 30.0}, {3.0, 4.5}, {20.0, 30.0},
              {0.1, 1.0}, {20.0, 30.0}, {4.5, 5.5}};
  }
  return {};
}

std::vector<std::string> parameter_names(Topology t) {
  switch (t) {
    case Topology::Classical: return {"g", "h"};
    case Topology::Folded: return {"w1", "l1", "w2", "l2", "w3"};
    case Topology::Cascaded: return {"w1", "l1", "w2", "l2", "w3", "l3", "w"};
  }
  return {};
}

std::size_t parameter_count(Topology t) { return parameter_names(t).size(); }

std::vector<double> geometry_to_vector(const Geometry& g) {
  return std::visit(
      [](const auto& geo) -> std::vector<double> {
        using T = std::decay_t<decltype(geo)>;
        if constexpr (std::is_same_v<T, ClassicalDesign>) {
          return {geo.g, geo.h};
        } else if constexpr (std::is_same_v<T, FoldedGeometry>) {
          return {geo.w1, geo.l1, geo.w2, geo.l2, geo.w3};
        } else {
          return {geo.w1, geo.l1, geo.w2, geo.l2, geo.w3, geo.l3, geo.w};
        }
      },
      g);
}

Geometry vector_to_geometry(Topology kind, std::span<const double> x) {
  const std::size_t expected = parameter_count(kind);
  if (x.size() != expected) {
    std::ostringstream os;
    os << to_string(kind) << " geometry needs " << expected << " values, got " << x.size();
    throw Error(ErrorKind::Shape, os.str());
  }
  switch (kind) {
    case Topology::Classical:
      return ClassicalDesign{x[0], x[1]};
    case Topology::Folded:
      return FoldedGeometry{x[0], x[1], x[2], x[3], x[4]};
    case Topology::Cascaded:
      return CascadedGeometry{x[0], x[1], x[2], x[3], x[4], x[5], x[6]};
  }
  throw Error(ErrorKind::InvalidArgument, "unknown topology");
}

void validate_geometry(const Geometry& g, const Bounds& bounds) {
  const Topology kind = topology_of(g);
  const auto x = geometry_to_vector(g);
  const auto names = parameter_names(kind);
  if (bounds.size() != x.size()) {
    throw Error(ErrorKind::Shape, "bounds dimension does not match geometry");
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double slack = 1e-12 * std::max(1.0, std::abs(bounds[i].hi));
    if (!std::isfinite(x[i]) || x[i] < bounds[i].lo - slack || x[i] > bounds[i].hi + slack) {
      os << ' ' << names[i] << '=' << x[i] << " not in [" << bounds[i].lo << ", " << bounds[i].hi
         << "];";
    }
  }
  if (kind == Topology::Classical && !(std::get<ClassicalDesign>(g).f_center_ghz > 0.0)) {
    os << " f_center must be positive;";
  }
  if (!os.str().empty()) {
    throw Error(ErrorKind::Validation, std::string(to_string(kind)) + " geometry out of bounds:" + os.str());
  }
}

void validate_geometry(const Geometry& g) { validate_geometry(g, default_bounds(topology_of(g))); }

FoldedArmLengths folded_arm_lengths(const FoldedGeometry& g) {
  const double through = 6.0 * g.l1 + 5.0 * g.u;
  return {through, through + 2.0 * g.l2};
}

namespace {

struct ArmLine {
  double y;
  double theta;
};

ArmLine physical_line(double w_mm, double l_mm, const Substrate& sub, double f_ghz) {
  const LineParams p = analyze_width(w_mm, sub);
  return {kPortImpedanceOhm / p.z0, electrical_length(l_mm, p.eps_eff, f_ghz)};
}

}  // namespace

std::vector<HalfCircuitElement> half_circuit(const Geometry& geometry, const Substrate& sub,
                                             double f_ghz) {
  return std::visit(
      [&](const auto& geo) -> std::vector<HalfCircuitElement> {
        using T = std::decay_t<decltype(geo)>;
        if constexpr (std::is_same_v<T, ClassicalDesign>) {
          const double theta = 0.5 * std::numbers::pi * f_ghz / geo.f_center_ghz;
          return {BranchArm{geo.g, theta}, TlineSegment{geo.h, theta}, BranchArm{geo.g, theta}};
        } else if constexpr (std::is_same_v<T, FoldedGeometry>) {
          const FoldedArmLengths len = folded_arm_lengths(geo);
          const ArmLine feed = physical_line(geo.w3, geo.v, sub, f_ghz);
          const ArmLine shunt = physical_line(geo.w2, len.shunt_mm, sub, f_ghz);
          const ArmLine through = physical_line(geo.w1, len.through_mm, sub, f_ghz);
          return {TlineSegment{feed.y, feed.theta}, BranchArm{shunt.y, shunt.theta},
                  TlineSegment{through.y, through.theta}, BranchArm{shunt.y, shunt.theta},
                  TlineSegment{feed.y, feed.theta}};
        } else {
          // Feed lines of width w only set the reference plane.
          const ArmLine outer = physical_line(geo.w1, geo.l1, sub, f_ghz);
          const ArmLine middle = physical_line(geo.w2, geo.l2, sub, f_ghz);
          const ArmLine branch = physical_line(geo.w3, geo.l3, sub, f_ghz);
          const BranchArm arm{branch.y, branch.theta};
          return {arm, TlineSegment{outer.y, outer.theta}, arm,
                  TlineSegment{middle.y, middle.theta}, arm,
                  TlineSegment{outer.y, outer.theta}, arm};
        }
      },
      geometry);
}

void FrequencySweep::validate() const {
  if (!(f_start_ghz > 0.0) || !(f_stop_ghz > f_start_ghz) || !std::isfinite(f_stop_ghz)) {
    std::ostringstream os;
    os << "invalid sweep [" << f_start_ghz << ", " << f_stop_ghz << "] GHz: need 0 < start < stop";
    throw Error(ErrorKind::Validation, os.str());
  }
  if (n_points < 2) {
    throw Error(ErrorKind::Validation, "sweep needs at least 2 points");
  }
}

double FrequencySweep::frequency(int i) const {
  if (i == n_points - 1) return f_stop_ghz;
  return f_start_ghz + (f_stop_ghz - f_start_ghz) * static_cast<double>(i) /
                           static_cast<double>(n_points - 1);
}

FourPortS simulate_point(const Geometry& g, const Substrate& sub, double f_ghz) {
  if (!(f_ghz > 0.0)) throw Error(ErrorKind::InvalidArgument, "frequency must be positive");
  const auto elements = half_circuit(g, sub, f_ghz);
  return analyze_symmetric(elements);
}

FourPortResponse simulate(const Geometry& g, const Substrate& sub, const FrequencySweep& sweep,
                          const Bounds& bounds) {
  validate_geometry(g, bounds);
  sub.validate();
  sweep.validate();
  FourPortResponse out{sweep, {}};
  out.points.reserve(static_cast<std::size_t>(sweep.n_points));
  for (int i = 0; i < sweep.n_points; ++i) {
    const double f = sweep.frequency(i);
    try {
      out.points.push_back(simulate_point(g, sub, f));
    } catch (const Error& e) {
      std::ostringstream os;
      os << e.what() << " at frequency index " << i << " (" << f << " GHz)";
      throw Error(e.kind(), os.str());
    }
  }
  return out;
}

FourPortResponse simulate(const Geometry& g, const Substrate& sub, const FrequencySweep& sweep) {
  return simulate(g, sub, sweep, default_bounds(topology_of(g)));
}

ClassicalDesign synth_classical(double c_db) {
  if (!(c_db > 0.0) || !std::isfinite(c_db)) {
    std::ostringstream os;
    os << "coupling factor must be strictly positive, got " << c_db << " dB";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  const double c_lin = std::pow(10.0, c_db / 20.0);
  const double g = 1.0 / std::sqrt(c_lin * c_lin - 1.0);
  return {g, std::sqrt(g * g + 1.0)};
}

double coupling_factor(double g, double h) {
  if (!(g > 0.0) || !(h > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "coupling factor needs g > 0 and h > 0");
  }
  return 20.0 * std::log10((g * g + 1.0) / (g * h));
}

double magnitude_db(const Complex& s) {
  constexpr double kFloorLinear = 1e-4;
  return 20.0 * std::log10(std::max(std::abs(s), kFloorLinear));
}

double wrap_degrees(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r <= -180.0) r += 360.0;
  if (r > 180.0) r -= 360.0;
  return r;
}

ElectricalVector electrical_properties(const FourPortS& s) {
  constexpr double kRadToDeg = 180.0 / std::numbers::pi;
  return {magnitude_db(s.s11),
          magnitude_db(s.s21),
          magnitude_db(s.s31),
          magnitude_db(s.s41),
          wrap_degrees(std::arg(s.s21) * kRadToDeg),
          wrap_degrees(std::arg(s.s31) * kRadToDeg)};
}

std::vector<PropertyPoint> to_property_sweep(const FourPortResponse& resp) {
  std::vector<PropertyPoint> out;
  out.reserve(resp.points.size());
  for (std::size_t i = 0; i < resp.points.size(); ++i) {
    out.push_back({resp.sweep.frequency(static_cast<int>(i)), electrical_properties(resp.points[i])});
  }
  return out;
}

namespace {

ElectricalVector interpolate(const PropertyPoint& a, const PropertyPoint& b, double f) {
  const double t = (f - a.f_ghz) / (b.f_ghz - a.f_ghz);
  ElectricalVector out{};
  for (std::size_t k = 0; k < kNumOutputs; ++k) {
    if (k == kPh21Deg || k == kPh31Deg) {
      out[k] = wrap_degrees(a.props[k] + t * wrap_degrees(b.props[k] - a.props[k]));
    } else {
      out[k] = a.props[k] + t * (b.props[k] - a.props[k]);
    }
  }
  return out;
}

}  // namespace

CouplerMetrics metrics(std::span<const PropertyPoint> sweep, double f0_ghz,
                       const MetricThresholds& thresholds) {
  if (sweep.size() < 2) throw Error(ErrorKind::InvalidArgument, "metrics need at least 2 sweep points");
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    if (!(sweep[i].f_ghz > sweep[i - 1].f_ghz)) {
      throw Error(ErrorKind::InvalidArgument, "sweep frequencies must be strictly increasing");
    }
  }
  const double f_lo = sweep.front().f_ghz;
  const double f_hi = sweep.back().f_ghz;
  const double tol = 1e-9 * std::max(1.0, std::abs(f0_ghz));
  if (!std::isfinite(f0_ghz) || f0_ghz < f_lo - tol || f0_ghz > f_hi + tol) {
    std::ostringstream os;
    os << "f0 = " << f0_ghz << " GHz lies outside the sweep [" << f_lo << ", " << f_hi << "] GHz";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }

  // Index of the grid point nearest to f0 (lower one on ties).
  std::size_t nearest = 0;
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    if (std::abs(sweep[i].f_ghz - f0_ghz) < std::abs(sweep[nearest].f_ghz - f0_ghz)) nearest = i;
  }

  ElectricalVector at_f0;
  if (std::abs(sweep[nearest].f_ghz - f0_ghz) <= tol) {
    at_f0 = sweep[nearest].props;
  } else {
    std::size_t j = 0;
    while (j + 2 < sweep.size() && sweep[j + 1].f_ghz < f0_ghz) ++j;
    at_f0 = interpolate(sweep[j], sweep[j + 1], f0_ghz);
  }

  CouplerMetrics m;
  m.coupling_db = -at_f0[kS31Db];
  m.phase_diff_deg = wrap_degrees(at_f0[kPh21Deg] - at_f0[kPh31Deg]);
  m.isolation_db = at_f0[kS41Db];
  m.return_loss_db = at_f0[kS11Db];
  m.k0_db = std::abs(at_f0[kS21Db] - at_f0[kS31Db]);

  const auto passes = [&](std::size_t i) {
    const auto& p = sweep[i].props;
    return p[kS11Db] < -thresholds.rl_db && p[kS41Db] < -thresholds.iso_db &&
           std::abs(p[kS21Db] - p[kS31Db]) < thresholds.imbalance_db;
  };
  if (passes(nearest)) {
    std::size_t lo = nearest;
    std::size_t hi = nearest;
    while (lo > 0 && passes(lo - 1)) --lo;
    while (hi + 1 < sweep.size() && passes(hi + 1)) ++hi;
    m.fbw_pct = 100.0 * (sweep[hi].f_ghz - sweep[lo].f_ghz) / f0_ghz;
  }
  return m;
}

CouplerMetrics metrics(const FourPortResponse& resp, double f0_ghz,
                       const MetricThresholds& thresholds) {
  const auto sweep = to_property_sweep(resp);
  return metrics(sweep, f0_ghz, thresholds);
}

}  // namespace blc
