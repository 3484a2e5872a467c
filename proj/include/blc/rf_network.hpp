#pragma once

// Normalized two-port ABCD algebra and even/odd-mode recombination for
// mirror-symmetric four-port branch-line networks. Every impedance here is
// scaled to the port reference, so admittances are dimensionless.

#include <complex>
#include <span>
#include <variant>
#include <vector>

namespace blc {

using Complex = std::complex<double>;

struct AbcdMatrix {
  Complex a{1.0}, b{0.0}, c{0.0}, d{1.0};

  static AbcdMatrix identity() { return {}; }
  Complex determinant() const { return a * d - b * c; }
};

AbcdMatrix operator*(const AbcdMatrix& lhs, const AbcdMatrix& rhs);

/// Series transmission line: admittance y (normalized, > 0), electrical length theta.
struct TlineSegment {
  double y = 1.0;
  double theta = 0.0;
};

enum class StubTermination { Open, Short };

struct ShuntStub {
  double y = 1.0;
  double theta = 0.0;
  StubTermination termination = StubTermination::Open;
};

/// A full shunt branch of the four-port. Bisection turns it into an Open
/// (even) or Short (odd) stub of half its electrical length.
struct BranchArm {
  double y = 1.0;
  double theta = 0.0;
};

using HalfCircuitElement = std::variant<TlineSegment, BranchArm>;

struct GammaT {
  Complex gamma;
  Complex t;
};

struct EvenOddPair {
  Complex gamma_e, t_e, gamma_o, t_o;
};

struct FourPortS {
  Complex s11, s21, s31, s41;

  double power_sum() const {
    return std::norm(s11) + std::norm(s21) + std::norm(s31) + std::norm(s41);
  }
};

struct EvenOddAbcd {
  AbcdMatrix even;
  AbcdMatrix odd;
};

/// Stub admittance poles closer than this are rejected.
inline constexpr double kStubPoleThreshold = 1e-12;

AbcdMatrix abcd_series_line(const TlineSegment& seg);
AbcdMatrix abcd_shunt_stub(const ShuntStub& stub);
AbcdMatrix abcd_cascade(std::span<const AbcdMatrix> elements);

/// Reflection and transmission of a two-port between unit source and load.
GammaT abcd_to_gamma_t(const AbcdMatrix& m);

/// Even- and odd-mode matrices of the classical single-stage coupler with
/// quarter-wave arms, written out in closed form.
EvenOddAbcd closed_form_even_odd(double g, double h);

FourPortS even_odd_to_sparams(const EvenOddPair& p);

/// Cascades the even-mode (Open) and odd-mode (Short) half circuits.
EvenOddAbcd half_circuits(std::span<const HalfCircuitElement> elements);

/// Full pipeline: bisect, cascade, convert and recombine.
FourPortS analyze_symmetric(std::span<const HalfCircuitElement> elements);

}  // namespace blc
