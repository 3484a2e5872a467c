#include "blc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "blc/dataset.hpp"
#include "blc/error.hpp"

namespace blc {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorKind::Config, "'" + where + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw Error(ErrorKind::Config, "unknown configuration key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::Config, "configuration key '" + where + key + "' has the wrong type");
  }
}

Interval read_interval(const json& j, const std::string& name) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorKind::Config, "'" + name + "' must be a two-element [lo, hi] array");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

RunConfig default_config(Topology kind) {
  RunConfig c;
  c.topology = kind;
  c.bounds = default_bounds(kind);
  switch (kind) {
    case Topology::Folded:
      c.substrate = {2.2, 0.0009, 0.508};
      c.sweep = {0.5, 2.0, 201};
      c.dataset = {600, {0.8, 1.7}, 1.0 / 6.0};
      c.spec.f0_ghz = 1.0;
      c.training.epochs = 500;
      break;
    case Topology::Cascaded:
      c.substrate = {2.2, 0.0009, 1.575};
      c.sweep = {1.0, 3.5, 201};
      c.dataset = {3300, {1.4, 3.2}, 1.0 / 11.0};
      c.spec.f0_ghz = 2.0;
      c.spec.band_offsets = {-0.15, 0.15};
      c.training.epochs = 1000;
      break;
    case Topology::Classical:
      c.sweep = {0.5, 1.5, 201};
      c.spec.f0_ghz = 1.0;
      break;
  }
  return c;
}

void RunConfig::finalize() {
  training.seed = seed;
  sade.seed = seed;
  sade.threads = threads;
  substrate.validate();
  sweep.validate();
  if (bounds.size() != parameter_count(topology)) {
    throw Error(ErrorKind::Config, "bounds do not match the topology's parameter count");
  }
  const auto names = parameter_names(topology);
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (!std::isfinite(bounds[i].lo) || !std::isfinite(bounds[i].hi) || !(bounds[i].lo < bounds[i].hi)) {
      std::ostringstream os;
      os << "invalid bounds for '" << names[i] << "': need lo < hi, got [" << bounds[i].lo << ", " << bounds[i].hi << "]";
      throw Error(ErrorKind::Config, os.str());
    }
    if (topology != Topology::Classical && !(bounds[i].lo > 0.0)) {
      throw Error(ErrorKind::Config, "invalid bounds for '" + names[i] + "': physical dimensions must be positive");
    }
  }
  if (!(dataset.f_band.lo > 0.0 && dataset.f_band.lo < dataset.f_band.hi)) {
    throw Error(ErrorKind::Config, "dataset.f_band_ghz must satisfy 0 < lo < hi");
  }
  if (!(dataset.test_fraction > 0.0 && dataset.test_fraction < 1.0)) {
    throw Error(ErrorKind::Config, "dataset.test_fraction must lie in (0, 1)");
  }
  spec.validate();
  training.validate();
  sade.validate();
}

RunConfig config_from_string(const std::string& content) {
  json j;
  try {
    j = json::parse(content);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("configuration is not valid structured text: ") + e.what());
  }
  reject_unknown(j, {"topology", "seed", "output_dir", "threads", "substrate", "bounds", "sweep", "dataset", "spec",
                     "training", "sade"},
                 "");
  Topology kind = Topology::Folded;
  if (j.contains("topology")) {
    if (!j["topology"].is_string()) throw Error(ErrorKind::Config, "'topology' must be a string");
    kind = topology_from_string(j["topology"].get<std::string>());
  }
  RunConfig c = default_config(kind);
  read(j, "seed", c.seed, "");
  read(j, "output_dir", c.output_dir, "");
  read(j, "threads", c.threads, "");

  if (j.contains("substrate")) {
    const auto& s = j["substrate"];
    reject_unknown(s, {"eps_r", "tan_d", "h_mm"}, "substrate");
    read(s, "eps_r", c.substrate.eps_r, "substrate.");
    read(s, "tan_d", c.substrate.tan_d, "substrate.");
    read(s, "h_mm", c.substrate.h_mm, "substrate.");
  }
  if (j.contains("bounds")) {
    const auto& b = j["bounds"];
    const auto names = parameter_names(kind);
    reject_unknown(b, std::set<std::string>(names.begin(), names.end()), "bounds");
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (b.contains(names[i])) c.bounds[i] = read_interval(b[names[i]], "bounds." + names[i]);
    }
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    reject_unknown(s, {"f_start_ghz", "f_stop_ghz", "n_points"}, "sweep");
    read(s, "f_start_ghz", c.sweep.f_start_ghz, "sweep.");
    read(s, "f_stop_ghz", c.sweep.f_stop_ghz, "sweep.");
    read(s, "n_points", c.sweep.n_points, "sweep.");
  }
  if (j.contains("dataset")) {
    const auto& d = j["dataset"];
    reject_unknown(d, {"n_samples", "f_band_ghz", "test_fraction"}, "dataset");
    read(d, "n_samples", c.dataset.n_samples, "dataset.");
    if (d.contains("f_band_ghz")) c.dataset.f_band = read_interval(d["f_band_ghz"], "dataset.f_band_ghz");
    read(d, "test_fraction", c.dataset.test_fraction, "dataset.");
  }
  if (j.contains("spec")) {
    const auto& s = j["spec"];
    reject_unknown(s, {"f0_ghz", "coupling_db", "phase_deg", "iso_threshold_db", "rl_threshold_db", "alpha", "beta",
                       "gamma", "lambda", "band_offsets"},
                   "spec");
    read(s, "f0_ghz", c.spec.f0_ghz, "spec.");
    read(s, "coupling_db", c.spec.coupling_target_db, "spec.");
    read(s, "phase_deg", c.spec.phase_target_deg, "spec.");
    read(s, "iso_threshold_db", c.spec.iso_threshold_db, "spec.");
    read(s, "rl_threshold_db", c.spec.rl_threshold_db, "spec.");
    read(s, "alpha", c.spec.alpha, "spec.");
    read(s, "beta", c.spec.beta, "spec.");
    read(s, "gamma", c.spec.gamma, "spec.");
    read(s, "lambda", c.spec.lambda, "spec.");
    read(s, "band_offsets", c.spec.band_offsets, "spec.");
  }
  if (j.contains("training")) {
    const auto& t = j["training"];
    reject_unknown(t, {"epochs", "batch_size", "learning_rate", "final_lr_fraction", "beta1", "beta2", "adam_eps",
                       "hidden", "activation"},
                   "training");
    read(t, "epochs", c.training.epochs, "training.");
    read(t, "batch_size", c.training.batch_size, "training.");
    read(t, "learning_rate", c.training.learning_rate, "training.");
    read(t, "final_lr_fraction", c.training.final_lr_fraction, "training.");
    read(t, "beta1", c.training.beta1, "training.");
    read(t, "beta2", c.training.beta2, "training.");
    read(t, "adam_eps", c.training.adam_eps, "training.");
    read(t, "hidden", c.training.hidden, "training.");
    if (t.contains("activation")) {
      std::string name;
      read(t, "activation", name, "training.");
      c.training.activation = activation_from_string(name);
    }
  }
  if (j.contains("sade")) {
    const auto& s = j["sade"];
    reject_unknown(s, {"np", "generations", "learning_period", "crm_init", "cr_dev", "cr_refresh", "f_mean", "f_dev",
                       "p_init", "p_min", "p_max"},
                   "sade");
    read(s, "np", c.sade.np, "sade.");
    read(s, "generations", c.sade.generations, "sade.");
    read(s, "learning_period", c.sade.learning_period, "sade.");
    read(s, "crm_init", c.sade.crm_init, "sade.");
    read(s, "cr_dev", c.sade.cr_dev, "sade.");
    read(s, "cr_refresh", c.sade.cr_refresh, "sade.");
    read(s, "f_mean", c.sade.f_mean, "sade.");
    read(s, "f_dev", c.sade.f_dev, "sade.");
    read(s, "p_init", c.sade.p_init, "sade.");
    read(s, "p_min", c.sade.p_min, "sade.");
    read(s, "p_max", c.sade.p_max, "sade.");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Config, "cannot read configuration file '" + path.string() + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return config_from_string(buf.str());
}

std::string config_to_string(const RunConfig& c) {
  json j;
  j["topology"] = std::string(to_string(c.topology));
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["threads"] = c.threads;
  j["substrate"] = {{"eps_r", c.substrate.eps_r}, {"tan_d", c.substrate.tan_d}, {"h_mm", c.substrate.h_mm}};
  const auto names = parameter_names(c.topology);
  json b = json::object();
  for (std::size_t i = 0; i < names.size() && i < c.bounds.size(); ++i) b[names[i]] = {c.bounds[i].lo, c.bounds[i].hi};
  j["bounds"] = b;
  j["sweep"] = {{"f_start_ghz", c.sweep.f_start_ghz}, {"f_stop_ghz", c.sweep.f_stop_ghz}, {"n_points", c.sweep.n_points}};
  j["dataset"] = {{"n_samples", c.dataset.n_samples},
                  {"f_band_ghz", {c.dataset.f_band.lo, c.dataset.f_band.hi}},
                  {"test_fraction", c.dataset.test_fraction}};
  j["spec"] = {{"f0_ghz", c.spec.f0_ghz},
               {"coupling_db", c.spec.coupling_target_db},
               {"phase_deg", c.spec.phase_target_deg},
               {"iso_threshold_db", c.spec.iso_threshold_db},
               {"rl_threshold_db", c.spec.rl_threshold_db},
               {"alpha", c.spec.alpha},
               {"beta", c.spec.beta},
               {"gamma", c.spec.gamma},
               {"lambda", c.spec.lambda},
               {"band_offsets", c.spec.band_offsets}};
  j["training"] = {{"epochs", c.training.epochs},
                   {"batch_size", c.training.batch_size},
                   {"learning_rate", c.training.learning_rate},
                   {"final_lr_fraction", c.training.final_lr_fraction},
                   {"beta1", c.training.beta1},
                   {"beta2", c.training.beta2},
                   {"adam_eps", c.training.adam_eps},
                   {"hidden", c.training.hidden},
                   {"activation", std::string(to_string(c.training.activation))}};
  j["sade"] = {{"np", c.sade.np},
               {"generations", c.sade.generations},
               {"learning_period", c.sade.learning_period},
               {"crm_init", c.sade.crm_init},
               {"cr_dev", c.sade.cr_dev},
               {"cr_refresh", c.sade.cr_refresh},
               {"f_mean", c.sade.f_mean},
               {"f_dev", c.sade.f_dev},
               {"p_init", c.sade.p_init},
               {"p_min", c.sade.p_min},
               {"p_max", c.sade.p_max}};
  return j.dump(2) + "\n";
}

}  // namespace blc
