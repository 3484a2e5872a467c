#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "blc/coupler.hpp"
#include "blc/objective.hpp"
#include "blc/sade.hpp"
#include "blc/surrogate.hpp"

namespace blc {

struct DatasetConfig {
  std::size_t n_samples = 600;
  Interval f_band{0.8, 1.7};
  double test_fraction = 1.0 / 6.0;
};

/// Everything a CLI run needs. A single seed drives sampling, splitting,
/// initialization and the evolutionary search.
struct RunConfig {
  Topology topology = Topology::Folded;
  Substrate substrate;
  Bounds bounds;  // design box; defaults per topology
  FrequencySweep sweep;
  DatasetConfig dataset;
  DesignSpec spec;
  TrainConfig training;
  SadeConfig sade;
  std::uint64_t seed = 7;
  std::string output_dir = "out";
  unsigned threads = 1;

  /// Pushes seed and threads into the nested module configs, then checks
  /// every nested validity rule.
  void finalize();
};

RunConfig default_config(Topology kind);

/// Structured text (JSON). The optional "topology" key selects the default
/// set; every other key overrides it. Unknown keys are errors.
RunConfig config_from_string(const std::string& content);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_string(const RunConfig& cfg);

}  // namespace blc
