#pragma once

// Quasi-static microstrip model (Hammerstad-Jensen closed forms, no
// dispersion). Lengths in mm, frequencies in GHz.

namespace blc {

inline constexpr double kSpeedOfLightMmPerNs = 299.792458;
inline constexpr double kFreeSpaceImpedance = 376.730313668;

/// The achievable synthesis window, in units of w/h.
inline constexpr double kMinWidthRatio = 0.05;
inline constexpr double kMaxWidthRatio = 30.0;

struct Substrate {
  double eps_r = 2.2;
  double tan_d = 0.0009;  // stored only; the truth model is lossless
  double h_mm = 0.508;

  void validate() const;
};

struct LineParams {
  double z0 = 0.0;
  double eps_eff = 1.0;
};

LineParams analyze_width(double w_mm, const Substrate& sub);

/// Bisection on analyze_width; result reproduces z0_target within 0.01 ohm.
double synthesize_width(double z0_target, const Substrate& sub);

double electrical_length(double l_mm, double eps_eff, double f_ghz);

}  // namespace blc
