#pragma once

// Branch-line coupler topologies, the analytic truth-model simulator and the
// scalar figures of merit derived from its response.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "blc/microstrip.hpp"
#include "blc/rf_network.hpp"

namespace blc {

enum class Topology { Classical, Folded, Cascaded };

std::string_view to_string(Topology t) noexcept;
Topology topology_from_string(std::string_view name);

/// Ideal coupler in normalized admittances; arms are a quarter wave at
/// f_center_ghz.
struct ClassicalDesign {
  double g = 1.0;
  double h = 1.4142135623730951;
  double f_center_ghz = 1.0;
};

struct FoldedGeometry {
  double w1 = 0, l1 = 0, w2 = 0, l2 = 0, w3 = 0;
  double u = 0.1;
  double v = 1.0;
};

struct CascadedGeometry {
  double w1 = 0, l1 = 0, w2 = 0, l2 = 0, w3 = 0, l3 = 0, w = 0;
};

using Geometry = std::variant<ClassicalDesign, FoldedGeometry, CascadedGeometry>;

Topology topology_of(const Geometry& g) noexcept;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

using Bounds = std::vector<Interval>;

/// Default design box of each topology, in geometry_to_vector order.
Bounds default_bounds(Topology t);
std::vector<std::string> parameter_names(Topology t);
std::size_t parameter_count(Topology t);

/// Canonical order (w1, l1, w2, l2, w3[, l3, w]) or (g, h).
std::vector<double> geometry_to_vector(const Geometry& g);
Geometry vector_to_geometry(Topology kind, std::span<const double> x);

/// Throws a validation error listing every violated bound.
void validate_geometry(const Geometry& g, const Bounds& bounds);
void validate_geometry(const Geometry& g);

/// Effective straight-line lengths of a folded coupler's meandered arms.
/// The through arm is a six-run serpentine of length l1 joined by five
/// turns of gap u; the shunt arm follows the same path plus two end tabs of
/// length l2. Bends are not modeled.
struct FoldedArmLengths {
  double through_mm = 0.0;
  double shunt_mm = 0.0;
};
FoldedArmLengths folded_arm_lengths(const FoldedGeometry& g);

inline constexpr double kPortImpedanceOhm = 50.0;

/// Half-circuit element list of a geometry at one frequency.
std::vector<HalfCircuitElement> half_circuit(const Geometry& g, const Substrate& sub, double f_ghz);

struct FrequencySweep {
  double f_start_ghz = 0.5;
  double f_stop_ghz = 2.0;
  int n_points = 201;

  void validate() const;
  double frequency(int i) const;
};

struct FourPortResponse {
  FrequencySweep sweep;
  std::vector<FourPortS> points;
};

FourPortS simulate_point(const Geometry& g, const Substrate& sub, double f_ghz);
FourPortResponse simulate(const Geometry& g, const Substrate& sub, const FrequencySweep& sweep);
FourPortResponse simulate(const Geometry& g, const Substrate& sub, const FrequencySweep& sweep,
                          const Bounds& bounds);

ClassicalDesign synth_classical(double c_db);
double coupling_factor(double g, double h);

// Six electrical properties per frequency: |s11|,|s21|,|s31|,|s41| in dB and
// the phases of s21, s31 in degrees.
inline constexpr std::size_t kNumOutputs = 6;
enum OutputIndex : std::size_t { kS11Db = 0, kS21Db, kS31Db, kS41Db, kPh21Deg, kPh31Deg };
using ElectricalVector = std::array<double, kNumOutputs>;

inline constexpr double kDbFloor = -80.0;

double magnitude_db(const Complex& s);
double wrap_degrees(double deg);
ElectricalVector electrical_properties(const FourPortS& s);

struct PropertyPoint {
  double f_ghz = 0.0;
  ElectricalVector props{};
};

std::vector<PropertyPoint> to_property_sweep(const FourPortResponse& resp);

struct MetricThresholds {
  double rl_db = 20.0;
  double iso_db = 20.0;
  double imbalance_db = 0.86;
};

struct CouplerMetrics {
  double coupling_db = 0.0;
  double phase_diff_deg = 0.0;
  double isolation_db = 0.0;
  double return_loss_db = 0.0;
  double fbw_pct = 0.0;
  double k0_db = 0.0;
};

CouplerMetrics metrics(std::span<const PropertyPoint> sweep, double f0_ghz,
                       const MetricThresholds& thresholds = {});
CouplerMetrics metrics(const FourPortResponse& resp, double f0_ghz,
                       const MetricThresholds& thresholds = {});

}  // namespace blc
