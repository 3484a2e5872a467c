// Command-line front end: dataset generation, surrogate training, design
// discovery, truth-model sweeps and metric extraction.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "blc/config.hpp"
#include "blc/coupler.hpp"
#include "blc/dataset.hpp"
#include "blc/error.hpp"
#include "blc/network_io.hpp"
#include "blc/objective.hpp"
#include "blc/surrogate.hpp"
#include "blc/text.hpp"

namespace fs = std::filesystem;
using blc::text::format_double;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 2;
constexpr int kExitNumerical = 3;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool quiet = false;
};

class Console {
 public:
  explicit Console(bool quiet) : quiet_(quiet) {}
  void info(const std::string& msg) const {
    if (!quiet_) std::cerr << msg << '\n';
  }
  void result(const std::string& text) const {
    if (!quiet_) std::cout << text;
  }
  void warn(const std::string& msg) const { std::cerr << "warning: " << msg << '\n'; }

 private:
  bool quiet_;
};

blc::RunConfig resolve_config(const GlobalOptions& g) {
  blc::RunConfig cfg = g.config_path.empty() ? blc::default_config(blc::Topology::Folded)
                                             : blc::load_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
  cfg.finalize();
  return cfg;
}

fs::path prepare_out(const blc::RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw blc::Error(blc::ErrorKind::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw blc::Error(blc::ErrorKind::Io, "cannot write '" + path.string() + "'");
  os << content;
  if (!os) throw blc::Error(blc::ErrorKind::Io, "write failed for '" + path.string() + "'");
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw blc::Error(blc::ErrorKind::InvalidArgument, std::string("missing ") + what);
  if (!fs::is_regular_file(path)) {
    throw blc::Error(blc::ErrorKind::Io, std::string(what) + " '" + path + "' does not exist");
  }
}

std::string metrics_header() { return "coupling_db,phase_diff_deg,isolation_db,return_loss_db,fbw_pct,k0_db"; }

std::string metrics_row(const blc::CouplerMetrics& m) {
  return format_double(m.coupling_db) + "," + format_double(m.phase_diff_deg) + "," + format_double(m.isolation_db) +
         "," + format_double(m.return_loss_db) + "," + format_double(m.fbw_pct) + "," + format_double(m.k0_db);
}

nlohmann::ordered_json metrics_json(const blc::CouplerMetrics& m) {
  return {{"coupling_db", m.coupling_db},       {"phase_diff_deg", m.phase_diff_deg},
          {"isolation_db", m.isolation_db},     {"return_loss_db", m.return_loss_db},
          {"fbw_pct", m.fbw_pct},               {"k0_db", m.k0_db}};
}

blc::MetricThresholds thresholds_from(const blc::DesignSpec& spec) {
  blc::MetricThresholds t;
  t.rl_db = -spec.rl_threshold_db;
  t.iso_db = -spec.iso_threshold_db;
  return t;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// --- subcommands -------------------------------------------------------------

int cmd_gen_data(const GlobalOptions& g) {
  const blc::RunConfig cfg = resolve_config(g);
  const Console out(g.quiet);
  if (cfg.topology == blc::Topology::Classical) {
    throw blc::Error(blc::ErrorKind::Config, "gen-data needs a folded or cascaded topology");
  }
  const fs::path dir = prepare_out(cfg);
  out.info("sampling " + std::to_string(cfg.dataset.n_samples) + " " + std::string(blc::to_string(cfg.topology)) +
           " designs");
  const blc::GenerationResult res = blc::generate(cfg.topology, cfg.substrate, cfg.dataset.n_samples,
                                                  cfg.dataset.f_band, cfg.seed, cfg.bounds, cfg.threads);
  if (res.degenerate_space) {
    out.warn("design space is largely degenerate: " + std::to_string(res.resamples) + " resamples were needed");
  }
  const fs::path path = dir / "dataset.csv";
  blc::save_dataset(path, res.data);
  out.info("wrote " + path.string());
  return kExitOk;
}

int cmd_train(const GlobalOptions& g, const std::string& data_path) {
  const blc::RunConfig cfg = resolve_config(g);
  const Console out(g.quiet);
  require_file(data_path, "dataset file");
  const blc::Dataset data = blc::load_dataset(fs::path(data_path));
  if (data.kind != cfg.topology) {
    throw blc::Error(blc::ErrorKind::TopologyMismatch, "dataset holds " + std::string(blc::to_string(data.kind)) +
                                                           " records but the configuration selects " +
                                                           std::string(blc::to_string(cfg.topology)));
  }
  const auto [train_set, test_set] = blc::split(data, cfg.dataset.test_fraction, cfg.seed);
  out.info("training on " + std::to_string(train_set.records.size()) + " records, testing on " +
           std::to_string(test_set.records.size()));
  const auto [model, report] = blc::train(train_set, test_set, cfg.training);
  const blc::ElectricalVector mae = blc::evaluate_mae(model, test_set);

  const fs::path dir = prepare_out(cfg);
  blc::save_model(model, dir / "model.json");

  struct Row {
    const char* label;
    int index;
  };
  std::vector<Row> rows;
  rows.push_back({"S11 (dB)", blc::kS11Db});
  if (cfg.topology == blc::Topology::Cascaded) rows.push_back({"S21 (dB)", blc::kS21Db});
  rows.push_back({"S31 (dB)", blc::kS31Db});
  rows.push_back({"S41 (dB)", blc::kS41Db});
  rows.push_back({"Phase S21 (deg)", blc::kPh21Deg});
  rows.push_back({"Phase S31 (deg)", blc::kPh31Deg});

  std::ostringstream csv;
  std::ostringstream table;
  csv << "property,mae\n";
  table << "Electrical property   MAE on test set\n";
  for (const Row& r : rows) {
    const double v = mae[static_cast<std::size_t>(r.index)];
    csv << r.label << ',' << format_double(v) << '\n';
    std::string label = r.label;
    label.resize(22, ' ');
    table << label << fixed(v, 3) << '\n';
  }
  write_text(dir / "mae.csv", csv.str());
  out.result(table.str());
  out.info("wrote " + (dir / "model.json").string());
  return kExitOk;
}

int cmd_discover(const GlobalOptions& g, const std::string& model_path) {
  const blc::RunConfig cfg = resolve_config(g);
  const Console out(g.quiet);
  require_file(model_path, "model file");
  const blc::MlpModel model = blc::load_model(fs::path(model_path));
  out.info("searching " + std::string(blc::to_string(cfg.topology)) + " design box for " +
           format_double(cfg.spec.coupling_target_db) + " dB @ " + format_double(cfg.spec.f0_ghz) + " GHz");
  const blc::DiscoveryOutcome res =
      blc::discover(cfg.spec, cfg.topology, model, cfg.sade, cfg.substrate, cfg.bounds);
  const blc::ValidationReport& v = res.validation;
  const auto names = blc::parameter_names(cfg.topology);

  std::ostringstream row;
  std::ostringstream head;
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::string upper = names[i];
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    head << (i ? "," : "") << upper;
    row << (i ? "," : "") << format_double(res.search.x_star[i]);
  }
  const std::string design_csv = "spec," + head.str() + "," + metrics_header() + "\n" +
                                 format_double(cfg.spec.coupling_target_db) + " dB @ " +
                                 format_double(cfg.spec.f0_ghz) + " GHz," + row.str() + "," +
                                 metrics_row(v.achieved) + "\n";

  nlohmann::ordered_json report;
  report["topology"] = std::string(blc::to_string(cfg.topology));
  report["spec"] = {{"f0_ghz", cfg.spec.f0_ghz},
                    {"coupling_db", cfg.spec.coupling_target_db},
                    {"phase_deg", cfg.spec.phase_target_deg},
                    {"iso_threshold_db", cfg.spec.iso_threshold_db},
                    {"rl_threshold_db", cfg.spec.rl_threshold_db}};
  nlohmann::ordered_json x = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < names.size(); ++i) x[names[i]] = res.search.x_star[i];
  report["x_star_mm"] = x;
  report["objective"] = res.search.f_star;
  report["predicted"] = metrics_json(v.predicted);
  report["predicted"].erase("fbw_pct");
  report["achieved"] = metrics_json(v.achieved);
  report["met"] = {{"coupling", v.coupling_met},
                   {"phase", v.phase_met},
                   {"isolation", v.isolation_met},
                   {"return_loss", v.return_loss_met},
                   {"all", v.all_met()}};

  const fs::path dir = prepare_out(cfg);
  write_text(dir / "design.csv", design_csv);
  write_text(dir / "validation.json", report.dump(2) + "\n");

  std::ostringstream table;
  table << head.str() << '\n' << row.str() << '\n';
  table << "coupling " << fixed(v.achieved.coupling_db, 3) << " dB, phase " << fixed(v.achieved.phase_diff_deg, 2)
        << " deg, isolation " << fixed(v.achieved.isolation_db, 2) << " dB, return loss "
        << fixed(v.achieved.return_loss_db, 2) << " dB, FBW " << fixed(v.achieved.fbw_pct, 2) << " %, k0 "
        << fixed(v.achieved.k0_db, 3) << " dB\n";
  table << (v.all_met() ? "specification met\n" : "specification NOT met\n");
  out.result(table.str());
  return kExitOk;
}

int cmd_simulate(const GlobalOptions& g, const std::string& geometry, bool touchstone) {
  const blc::RunConfig cfg = resolve_config(g);
  const Console out(g.quiet);
  if (geometry.empty()) throw blc::Error(blc::ErrorKind::InvalidArgument, "missing --geometry");
  std::vector<double> x;
  for (const std::string_view tok : blc::text::split(geometry, ',')) {
    double v = 0.0;
    if (!blc::text::parse_double(blc::text::trim(tok), v)) {
      throw blc::Error(blc::ErrorKind::InvalidArgument, "geometry value '" + std::string(tok) + "' is not a number");
    }
    x.push_back(v);
  }
  blc::Geometry geo = blc::vector_to_geometry(cfg.topology, x);
  if (auto* c = std::get_if<blc::ClassicalDesign>(&geo)) c->f_center_ghz = cfg.spec.f0_ghz;
  const blc::FourPortResponse resp = blc::simulate(geo, cfg.substrate, cfg.sweep, cfg.bounds);
  const auto props = blc::to_property_sweep(resp);

  const fs::path dir = prepare_out(cfg);
  blc::write_sweep_csv(dir / "sweep.csv", props);
  if (touchstone) blc::write_touchstone(dir / "coupler.s4p", resp);
  out.info("wrote " + (dir / "sweep.csv").string());

  if (cfg.spec.f0_ghz >= cfg.sweep.f_start_ghz && cfg.spec.f0_ghz <= cfg.sweep.f_stop_ghz) {
    const blc::CouplerMetrics m = blc::metrics(props, cfg.spec.f0_ghz, thresholds_from(cfg.spec));
    out.result(metrics_header() + "\n" + metrics_row(m) + "\n");
  }
  return kExitOk;
}

int cmd_metrics(const GlobalOptions& g, const std::string& sweep_path, std::optional<double> f0) {
  const blc::RunConfig cfg = resolve_config(g);
  require_file(sweep_path, "sweep file");
  const auto props = blc::read_sweep_csv(fs::path(sweep_path));
  const double f = f0.value_or(cfg.spec.f0_ghz);
  const blc::CouplerMetrics m = blc::metrics(props, f, thresholds_from(cfg.spec));
  // The metrics row is the command's product, so it is printed even with --quiet.
  std::cout << metrics_header() << '\n' << metrics_row(m) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branch-line coupler design automation: sampling, surrogate training, discovery and simulation"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "Run configuration file (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed overriding the configuration");
  app.add_option("--out", g.out_dir, "Output directory overriding the configuration");
  app.add_flag("--quiet", g.quiet, "Suppress progress and result tables");

  auto* gen = app.add_subcommand("gen-data", "Sample the design space and write dataset.csv");

  std::string data_path;
  auto* tr = app.add_subcommand("train", "Train the surrogate; writes model.json and mae.csv");
  tr->add_option("--data", data_path, "Dataset file")->required();

  std::string model_path;
  auto* disc = app.add_subcommand("discover", "Search for a geometry meeting the configured spec");
  disc->add_option("--model", model_path, "Model file")->required();

  std::string geometry;
  bool touchstone = false;
  auto* sim = app.add_subcommand("simulate", "Sweep a geometry with the truth model; writes sweep.csv");
  sim->add_option("--geometry", geometry, "Comma-separated parameters in mm (g,h for classical)")->required();
  sim->add_flag("--touchstone", touchstone, "Also write coupler.s4p");

  std::string sweep_path;
  std::optional<double> f0;
  auto* met = app.add_subcommand("metrics", "Compute coupler metrics from a sweep CSV");
  met->add_option("--sweep-csv", sweep_path, "Sweep file")->required();
  met->add_option("--f0", f0, "Center frequency in GHz (defaults to the configured spec)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUser;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*gen) return cmd_gen_data(g);
    if (*tr) return cmd_train(g, data_path);
    if (*disc) return cmd_discover(g, model_path);
    if (*sim) return cmd_simulate(g, geometry, touchstone);
    if (*met) return cmd_metrics(g, sweep_path, f0);
  } catch (const blc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return blc::is_numerical(e.kind()) ? kExitNumerical : kExitUser;
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  }
  return kExitUser;
}
