#pragma once

// Training data for the surrogate: Latin-hypercube samples of the design box
// (plus frequency) labelled by the truth-model simulator.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "blc/coupler.hpp"

namespace blc {

struct SampleRecord {
  std::vector<double> x;  // geometry_to_vector order, mm
  double f_ghz = 0.0;
  ElectricalVector y{};
};

struct ColumnRange {
  double min = 0.0;
  double max = 1.0;
};

/// Per-column ranges: inputs are x then f; outputs follow ElectricalVector.
struct Normalization {
  std::vector<ColumnRange> inputs;
  std::vector<ColumnRange> outputs;
};

struct Dataset {
  Topology kind = Topology::Folded;
  std::vector<SampleRecord> records;
  Normalization norm;

  std::size_t input_dim() const { return parameter_count(kind) + 1; }
};

inline constexpr const char* kDatasetVersionTag = "coupler-dataset v1";

/// Canonical CSV column names: geometry, f_ghz, then the six outputs.
std::vector<std::string> dataset_columns(Topology kind);

/// Rejects degenerate (constant) columns.
Normalization compute_normalization(Topology kind, std::span<const SampleRecord> records);

void validate_bounds(const Bounds& bounds);

/// n points; in every dimension exactly one point per equal-width stratum.
std::vector<std::vector<double>> lhs_sample(const Bounds& bounds, std::size_t n, std::uint64_t seed);

struct GenerationResult {
  Dataset data;
  std::size_t resamples = 0;
  bool degenerate_space = false;  // more than 10 % of records needed resampling
};

/// Geometry and frequency are drawn jointly by one Latin hypercube over
/// bounds x f_band. Records whose simulation fails are redrawn from a
/// counter-seeded stream, so the result is independent of `threads`.
GenerationResult generate(Topology kind, const Substrate& sub, std::size_t n, Interval f_band,
                          std::uint64_t seed, const Bounds& bounds = {}, unsigned threads = 0);

/// test size = floor(n * test_fraction). Both parts keep the original record
/// order and carry the normalization of the training part.
std::pair<Dataset, Dataset> split(const Dataset& d, double test_fraction, std::uint64_t seed);

void save_dataset(std::ostream& os, const Dataset& d);
void save_dataset(const std::filesystem::path& path, const Dataset& d);
Dataset load_dataset(std::istream& is);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace blc
