#include "blc/rf_network.hpp"

#include <cmath>
#include <sstream>

#include "blc/error.hpp"

namespace blc {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidElement: return "invalid-element";
    case ErrorKind::SingularStub: return "singular-stub";
    case ErrorKind::DegenerateNetwork: return "degenerate-network";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::UnsupportedVersion: return "unsupported-version";
    case ErrorKind::TopologyMismatch: return "topology-mismatch";
    case ErrorKind::Config: return "config";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

namespace {

constexpr Complex kJ{0.0, 1.0};

void check_element(double y, double theta, const char* what) {
  if (!(y > 0.0) || !std::isfinite(y)) {
    std::ostringstream os;
    os << what << ": admittance must be positive and finite, got " << y;
    throw Error(ErrorKind::InvalidElement, os.str());
  }
  if (!std::isfinite(theta)) {
    std::ostringstream os;
    os << what << ": electrical length must be finite, got " << theta;
    throw Error(ErrorKind::InvalidElement, os.str());
  }
}

}  // namespace

AbcdMatrix operator*(const AbcdMatrix& lhs, const AbcdMatrix& rhs) {
  return {lhs.a * rhs.a + lhs.b * rhs.c, lhs.a * rhs.b + lhs.b * rhs.d,
          lhs.c * rhs.a + lhs.d * rhs.c, lhs.c * rhs.b + lhs.d * rhs.d};
}

AbcdMatrix abcd_series_line(const TlineSegment& seg) {
  check_element(seg.y, seg.theta, "series line");
  const double c = std::cos(seg.theta);
  const double s = std::sin(seg.theta);
  return {Complex{c}, kJ * (s / seg.y), kJ * (seg.y * s), Complex{c}};
}

AbcdMatrix abcd_shunt_stub(const ShuntStub& stub) {
  check_element(stub.y, stub.theta, "shunt stub");
  const double c = std::cos(stub.theta);
  const double s = std::sin(stub.theta);
  Complex y_in;
  if (stub.termination == StubTermination::Open) {
    if (std::abs(c) < kStubPoleThreshold) {
      std::ostringstream os;
      os << "open stub evaluated at an admittance pole (theta=" << stub.theta << ")";
      throw Error(ErrorKind::SingularStub, os.str());
    }
    y_in = kJ * (stub.y * s / c);
  } else {
    if (std::abs(s) < kStubPoleThreshold) {
      std::ostringstream os;
      os << "short stub evaluated at an admittance pole (theta=" << stub.theta << ")";
      throw Error(ErrorKind::SingularStub, os.str());
    }
    y_in = -kJ * (stub.y * c / s);
  }
  return {Complex{1.0}, Complex{0.0}, y_in, Complex{1.0}};
}

AbcdMatrix abcd_cascade(std::span<const AbcdMatrix> elements) {
  if (elements.empty()) {
    throw Error(ErrorKind::InvalidArgument, "cannot cascade an empty element list");
  }
  AbcdMatrix acc = elements.front();
  for (const auto& m : elements.subspan(1)) acc = acc * m;
  return acc;
}

GammaT abcd_to_gamma_t(const AbcdMatrix& m) {
  const Complex denom = m.a + m.b + m.c + m.d;
  if (std::abs(denom) == 0.0 || !std::isfinite(std::abs(denom))) {
    throw Error(ErrorKind::DegenerateNetwork, "a+b+c+d vanishes; network has no finite S-parameters");
  }
  return {(m.a + m.b - m.c - m.d) / denom, 2.0 / denom};
}

EvenOddAbcd closed_form_even_odd(double g, double h) {
  if (!(g > 0.0) || !(h > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "closed-form matrices need g > 0 and h > 0");
  }
  const Complex b = kJ / h;
  const Complex c = kJ * h - kJ * (g * g / h);
  const double diag = g / h;
  return {AbcdMatrix{Complex{-diag}, b, c, Complex{-diag}},
          AbcdMatrix{Complex{diag}, b, c, Complex{diag}}};
}

FourPortS even_odd_to_sparams(const EvenOddPair& p) {
  return {0.5 * (p.gamma_e + p.gamma_o), 0.5 * (p.t_e + p.t_o), 0.5 * (p.t_e - p.t_o),
          0.5 * (p.gamma_e - p.gamma_o)};
}

EvenOddAbcd half_circuits(std::span<const HalfCircuitElement> elements) {
  if (elements.empty()) {
    throw Error(ErrorKind::InvalidArgument, "half circuit has no elements");
  }
  EvenOddAbcd out;
  for (const auto& el : elements) {
    if (const auto* line = std::get_if<TlineSegment>(&el)) {
      const AbcdMatrix m = abcd_series_line(*line);
      out.even = out.even * m;
      out.odd = out.odd * m;
    } else {
      const auto& arm = std::get<BranchArm>(el);
      const double half = 0.5 * arm.theta;
      out.even = out.even * abcd_shunt_stub({arm.y, half, StubTermination::Open});
      out.odd = out.odd * abcd_shunt_stub({arm.y, half, StubTermination::Short});
    }
  }
  return out;
}

FourPortS analyze_symmetric(std::span<const HalfCircuitElement> elements) {
  const EvenOddAbcd halves = half_circuits(elements);
  const GammaT even = abcd_to_gamma_t(halves.even);
  const GammaT odd = abcd_to_gamma_t(halves.odd);
  return even_odd_to_sparams({even.gamma, even.t, odd.gamma, odd.t});
}

}  // namespace blc
