#pragma once

// Plot-ready sweep CSV and Touchstone v1 (.s4p) import/export.

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "blc/coupler.hpp"

namespace blc {

inline constexpr const char* kSweepCsvHeader =
    "f_ghz,s11_db,s21_db,s31_db,s41_db,ph21_deg,ph31_deg,phase_diff_deg";

void write_sweep_csv(std::ostream& os, std::span<const PropertyPoint> sweep);
void write_sweep_csv(const std::filesystem::path& path, std::span<const PropertyPoint> sweep);

/// Throws parse errors carrying the 1-based line number.
std::vector<PropertyPoint> read_sweep_csv(std::istream& is);
std::vector<PropertyPoint> read_sweep_csv(const std::filesystem::path& path);

/// Full 4x4 matrix rebuilt from s11/s21/s31/s41 using the coupler's double
/// mirror symmetry:
///   [s11 s21 s31 s41; s21 s11 s41 s31; s31 s41 s11 s21; s41 s31 s21 s11]
void write_touchstone(std::ostream& os, const FourPortResponse& resp);
void write_touchstone(const std::filesystem::path& path, const FourPortResponse& resp);

struct TouchstoneData {
  std::vector<double> f_ghz;
  std::vector<FourPortS> points;  // first column of each matrix
};

TouchstoneData read_touchstone(std::istream& is);
TouchstoneData read_touchstone(const std::filesystem::path& path);

}  // namespace blc
