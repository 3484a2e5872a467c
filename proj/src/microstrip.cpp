#include "blc/microstrip.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "blc/error.hpp"

namespace blc {

void Substrate::validate() const {
  std::ostringstream os;
  if (!(eps_r >= 1.0) || !std::isfinite(eps_r)) os << " eps_r must be >= 1 (got " << eps_r << ");";
  if (!(h_mm > 0.0) || !std::isfinite(h_mm)) os << " h must be > 0 (got " << h_mm << ");";
  if (!(tan_d >= 0.0) || !std::isfinite(tan_d)) os << " tan_d must be >= 0 (got " << tan_d << ");";
  if (!os.str().empty()) throw Error(ErrorKind::Validation, "invalid substrate:" + os.str());
}

LineParams analyze_width(double w_mm, const Substrate& sub) {
  if (!(w_mm > 0.0) || !std::isfinite(w_mm)) {
    std::ostringstream os;
    os << "microstrip width must be positive, got " << w_mm;
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  sub.validate();
  const double u = w_mm / sub.h_mm;
  const double er = sub.eps_r;

  // Hammerstad & Jensen (1980), homogeneous-air impedance.
  const double fu = 6.0 + (2.0 * std::numbers::pi - 6.0) * std::exp(-std::pow(30.666 / u, 0.7528));
  const double z_air = kFreeSpaceImpedance / (2.0 * std::numbers::pi) *
                       std::log(fu / u + std::sqrt(1.0 + 4.0 / (u * u)));

  const double u4 = u * u * u * u;
  const double a = 1.0 + std::log((u4 + (u / 52.0) * (u / 52.0)) / (u4 + 0.432)) / 49.0 +
                   std::log(1.0 + std::pow(u / 18.1, 3.0)) / 18.7;
  const double b = 0.564 * std::pow((er - 0.9) / (er + 3.0), 0.053);
  const double eps_eff = 0.5 * (er + 1.0) + 0.5 * (er - 1.0) * std::pow(1.0 + 10.0 / u, -a * b);

  return {z_air / std::sqrt(eps_eff), eps_eff};
}

double synthesize_width(double z0_target, const Substrate& sub) {
  sub.validate();
  double w_lo = kMinWidthRatio * sub.h_mm;  // highest impedance
  double w_hi = kMaxWidthRatio * sub.h_mm;  // lowest impedance
  const double z_max = analyze_width(w_lo, sub).z0;
  const double z_min = analyze_width(w_hi, sub).z0;
  if (!(z0_target >= z_min && z0_target <= z_max)) {
    std::ostringstream os;
    os << "target impedance " << z0_target << " ohm outside achievable range [" << z_min << ", "
       << z_max << "] ohm for this substrate";
    throw Error(ErrorKind::OutOfRange, os.str());
  }
  // z0 decreases with width.
  for (int it = 0; it < 200 && (w_hi - w_lo) > 1e-13 * w_hi; ++it) {
    const double mid = 0.5 * (w_lo + w_hi);
    if (analyze_width(mid, sub).z0 > z0_target) {
      w_lo = mid;
    } else {
      w_hi = mid;
    }
  }
  return 0.5 * (w_lo + w_hi);
}

double electrical_length(double l_mm, double eps_eff, double f_ghz) {
  return 2.0 * std::numbers::pi * f_ghz * std::sqrt(eps_eff) * l_mm / kSpeedOfLightMmPerNs;
}

}  // namespace blc
