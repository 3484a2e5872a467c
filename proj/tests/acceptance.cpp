// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "blc/config.hpp"
#include "blc/coupler.hpp"
#include "blc/dataset.hpp"
#include "blc/error.hpp"
#include "blc/objective.hpp"
#include "blc/rf_network.hpp"
#include "blc/sade.hpp"
#include "blc/surrogate.hpp"

namespace fs = std::filesystem;
using namespace blc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + why;
    }
  }
};

int g_failures = 0;

void report(int id, const std::string& name, const Verdict& v) {
  if (!v.pass) ++g_failures;
  std::cout << (v.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << (v.detail.empty() ? "" : ": ")
            << v.detail << std::endl;
}

double cdist(const Complex& a, const Complex& b) { return std::abs(a - b); }

const Complex kJ{0.0, 1.0};
constexpr double kQuarter = std::numbers::pi / 2.0;

std::vector<HalfCircuitElement> classical_half(double g, double h) {
  return {BranchArm{g, kQuarter}, TlineSegment{h, kQuarter}, BranchArm{g, kQuarter}};
}

Verdict closed_form_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  double worst_abcd = 0.0;
  double worst_gt = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double g = u(rng);
    const double h = u(rng);
    const EvenOddAbcd hc = half_circuits(classical_half(g, h));
    const Complex a = -g / h;
    const Complex b = kJ / h;
    const Complex c = kJ * h - kJ * (g * g / h);
    worst_abcd = std::max({worst_abcd, cdist(hc.even.a, a), cdist(hc.even.b, b), cdist(hc.even.c, c),
                           cdist(hc.even.d, a), cdist(hc.odd.a, -a), cdist(hc.odd.b, b), cdist(hc.odd.c, c),
                           cdist(hc.odd.d, -a)});
    const Complex num = kJ * (g * g / h + 1.0 / h - h);
    const Complex im = kJ * (h + 1.0 / h - g * g / h);
    const GammaT e = abcd_to_gamma_t(hc.even);
    const GammaT o = abcd_to_gamma_t(hc.odd);
    worst_gt = std::max({worst_gt, cdist(e.gamma, num / (-2.0 * g / h + im)), cdist(e.t, 2.0 / (-2.0 * g / h + im)),
                         cdist(o.gamma, num / (2.0 * g / h + im)), cdist(o.t, 2.0 / (2.0 * g / h + im))});
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.detail = "max ABCD error " + sci(worst_abcd) + ", max gamma/T error " + sci(worst_gt) + ", " + fmt(secs) + " s";
  v.require(worst_abcd < 1e-12, "ABCD entries differ");
  v.require(worst_gt < 1e-12, "gamma/T differ");
  v.require(secs < 1.0, "too slow");
  return v;
}

Verdict matching_law() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> u(1.05, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double h = u(rng);
    const FourPortS s = analyze_symmetric(classical_half(std::sqrt(h * h - 1.0), h));
    worst = std::max({worst, std::abs(s.s11), std::abs(s.s41)});
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.detail = "max |s11|,|s41| " + sci(worst) + ", " + fmt(secs) + " s";
  v.require(worst < 1e-12, "not matched");
  v.require(secs < 1.0, "too slow");
  return v;
}

CouplerMetrics classical_center_metrics(double c_db) {
  ClassicalDesign d = synth_classical(c_db);
  d.f_center_ghz = 1.0;
  return metrics(simulate(d, Substrate{}, FrequencySweep{0.5, 1.5, 201}), 1.0);
}

Verdict coupling_factor_check() {
  Verdict v;
  const double c = coupling_factor(1.0, std::sqrt(2.0));
  // 3.0103 dB is 10 lg 2 rounded to four decimals: check the exact value to
  // 1e-9 and the rounding separately.
  v.require(std::abs(c - 10.0 * std::log10(2.0)) <= 1e-9, "coupling_factor(1, sqrt 2) != 10 lg 2");
  v.require(fmt(c, 4) == "3.0103", "coupling_factor(1, sqrt 2) = " + fmt(c, 6));
  double worst = 0.0;
  for (double target : {3.0, 4.0, 5.0, 6.0}) {
    const ClassicalDesign d = synth_classical(target);
    worst = std::max({worst, std::abs(coupling_factor(d.g, d.h) - target),
                      std::abs(classical_center_metrics(target).coupling_db - target)});
  }
  v.detail = "C(1, sqrt 2) = " + fmt(c, 9) + " dB, round-trip error " + sci(worst) + " dB";
  v.require(worst <= 1e-9, "round-trip error");
  return v;
}

Verdict quadrature_phase() {
  const double ph = classical_center_metrics(3.0).phase_diff_deg;
  Verdict v;
  v.detail = "phase difference " + fmt(ph, 12) + " deg";
  v.require(std::abs(ph - 90.0) <= 1e-9, "not +90");
  return v;
}

Verdict unitarity() {
  std::vector<std::pair<Geometry, Substrate>> cases;
  ClassicalDesign classical = synth_classical(3.0);
  cases.push_back({classical, Substrate{}});
  cases.push_back({FoldedGeometry{2.7, 9.1, 1.7, 0.8, 1.7}, default_config(Topology::Folded).substrate});
  const Substrate casc_sub = default_config(Topology::Cascaded).substrate;
  cases.push_back({CascadedGeometry{5, 26.1, 4.3, 29.6, 0.7, 27, 5.2}, casc_sub});
  for (Topology kind : {Topology::Folded, Topology::Cascaded}) {
    const RunConfig cfg = default_config(kind);
    for (const auto& x : lhs_sample(cfg.bounds, 25, 1005)) cases.push_back({vector_to_geometry(kind, x), cfg.substrate});
  }
  double worst = 0.0;
  int sweeps = 0;
  int skipped = 0;
  for (const auto& [g, sub] : cases) {
    const FrequencySweep sweep = topology_of(g) == Topology::Classical ? FrequencySweep{0.5, 1.5, 201}
                                                                        : default_config(topology_of(g)).sweep;
    try {
      const FourPortResponse r = simulate(g, sub, sweep);
      ++sweeps;
      for (const FourPortS& s : r.points) worst = std::max(worst, std::abs(s.power_sum() - 1.0));
    } catch (const Error& e) {
      if (!is_numerical(e.kind())) throw;
      ++skipped;  // a stub pole inside the sweep has no finite response
    }
  }
  Verdict v;
  v.detail = std::to_string(sweeps) + " sweeps x 201 points, max |sum - 1| " + sci(worst) +
             (skipped ? ", " + std::to_string(skipped) + " with stub poles skipped" : "");
  v.require(worst <= 1e-9, "power not conserved");
  v.require(sweeps >= 40, "too few sweeps");
  return v;
}

std::vector<double*> parameters(std::vector<DenseLayer>& layers) {
  std::vector<double*> p;
  for (auto& L : layers) {
    for (Eigen::Index i = 0; i < L.w.size(); ++i) p.push_back(L.w.data() + i);
    for (Eigen::Index i = 0; i < L.b.size(); ++i) p.push_back(L.b.data() + i);
  }
  return p;
}

Verdict gradient_check() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1006);
  std::uniform_int_distribution<int> depth(1, 3);
  std::uniform_int_distribution<int> width(2, 12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Activation acts[] = {Activation::Tanh, Activation::Silu, Activation::Sigmoid};
  constexpr double kStep = 1e-5;
  constexpr int kModels = 128;
  double worst = 0.0;
  for (int trial = 0; trial < kModels; ++trial) {
    const Topology kind = trial % 2 ? Topology::Cascaded : Topology::Folded;
    std::vector<int> hidden(static_cast<std::size_t>(depth(rng)));
    for (int& h : hidden) h = width(rng);
    Normalization norm;
    norm.inputs.assign(parameter_count(kind) + 1, {-1.0, 1.0});
    norm.outputs.assign(kNumOutputs, {-30.0, 0.0});
    norm.outputs[kPh21Deg] = norm.outputs[kPh31Deg] = {-180.0, 180.0};
    MlpModel m = make_model(kind, hidden, acts[trial % 3], norm, static_cast<std::uint64_t>(trial));
    Batch b{Eigen::MatrixXd(m.input_dim(), 5), Eigen::MatrixXd(m.output_dim(), 5)};
    for (Eigen::Index i = 0; i < b.inputs.size(); ++i) b.inputs.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < b.targets.size(); ++i) b.targets.data()[i] = 0.9 * u(rng);
    Gradient g = gradient(m, b);
    auto params = parameters(m.layers);
    auto grads = parameters(g.layers);
    double diff2 = 0.0, n_bp = 0.0, n_fd = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = *params[i];
      *params[i] = saved + kStep;
      const double up = batch_loss(m, b);
      *params[i] = saved - kStep;
      const double down = batch_loss(m, b);
      *params[i] = saved;
      const double fd = (up - down) / (2.0 * kStep);
      diff2 += (fd - *grads[i]) * (fd - *grads[i]);
      n_bp += *grads[i] * *grads[i];
      n_fd += fd * fd;
    }
    worst = std::max(worst, std::sqrt(diff2) / std::max({std::sqrt(n_bp), std::sqrt(n_fd), 1e-300}));
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.detail = std::to_string(kModels) + " models, max relative error " + sci(worst) + ", " + fmt(secs) + " s";
  v.require(worst < 1e-4, "gradient mismatch");
  v.require(secs < 30.0, "too slow");
  return v;
}

struct TrainedSurrogate {
  RunConfig cfg;
  MlpModel model;
  ElectricalVector mae{};
  std::size_t n_train = 0, n_test = 0;
  double seconds = 0.0;
};

TrainedSurrogate train_default(Topology kind) {
  TrainedSurrogate t;
  t.cfg = default_config(kind);
  t.cfg.finalize();
  const auto t0 = Clock::now();
  const RunConfig& c = t.cfg;
  const Dataset all =
      generate(kind, c.substrate, c.dataset.n_samples, c.dataset.f_band, c.seed, c.bounds, c.threads).data;
  const auto [tr, te] = split(all, c.dataset.test_fraction, c.seed);
  t.n_train = tr.records.size();
  t.n_test = te.records.size();
  t.model = train(tr, te, c.training).first;
  t.mae = evaluate_mae(t.model, te);
  t.seconds = seconds_since(t0);
  return t;
}

void check_surrogate(Verdict& v, const TrainedSurrogate& t, std::size_t n_train, std::size_t n_test, int epochs,
                     double db_bound, double deg_bound, double seconds_bound) {
  const std::string name(to_string(t.cfg.topology));
  v.detail += (v.detail.empty() ? "" : " | ") + name + " " + std::to_string(t.n_train) + "/" +
              std::to_string(t.n_test) + ", MAE dB " + fmt(t.mae[kS11Db]) + "/" + fmt(t.mae[kS21Db]) + "/" +
              fmt(t.mae[kS31Db]) + "/" + fmt(t.mae[kS41Db]) + ", deg " + fmt(t.mae[kPh21Deg]) + "/" +
              fmt(t.mae[kPh31Deg]) + ", " + fmt(t.seconds, 1) + " s";
  v.require(t.n_train == n_train && t.n_test == n_test, name + " split size");
  v.require(t.cfg.training.epochs == epochs, name + " epochs");
  for (std::size_t k : {kS11Db, kS21Db, kS31Db, kS41Db}) v.require(t.mae[k] <= db_bound, name + " magnitude MAE");
  for (std::size_t k : {kPh21Deg, kPh31Deg}) v.require(t.mae[k] <= deg_bound, name + " phase MAE");
  v.require(t.seconds < seconds_bound, name + " too slow");
}

Verdict optimizer_benchmarks() {
  const auto t0 = Clock::now();
  const auto sphere = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };
  const auto rosenbrock = [](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      s += 100.0 * std::pow(x[i + 1] - x[i] * x[i], 2) + std::pow(1.0 - x[i], 2);
    }
    return s;
  };
  int sphere_ok = 0;
  int rosen_ok = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SadeConfig c;
    c.np = 50;
    c.generations = 100;
    c.seed = seed;
    if (run(sphere, Bounds(10, Interval{-5.0, 5.0}), c).f_star < 1e-6) ++sphere_ok;
    c.np = 100;
    c.generations = 200;
    if (run(rosenbrock, Bounds(5, Interval{-5.0, 10.0}), c).f_star < 1e-2) ++rosen_ok;
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.detail = "sphere " + std::to_string(sphere_ok) + "/20, rosenbrock " + std::to_string(rosen_ok) + "/20, " +
             fmt(secs, 1) + " s";
  v.require(sphere_ok >= 19, "sphere");
  v.require(rosen_ok >= 18, "rosenbrock");
  v.require(secs < 60.0, "too slow");
  return v;
}

bool inside(const std::vector<double>& x, const Bounds& b) {
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (x[k] < b[k].lo || x[k] > b[k].hi) return false;
  }
  return true;
}

Verdict discovery(const TrainedSurrogate& t, const std::vector<std::pair<double, double>>& specs, double min_fbw,
                  double seconds_per_spec) {
  Verdict v;
  int met = 0;
  for (const auto& [c_db, f0] : specs) {
    DesignSpec spec = t.cfg.spec;
    spec.coupling_target_db = c_db;
    spec.f0_ghz = f0;
    SadeConfig sade = t.cfg.sade;
    sade.np = 100;
    sade.generations = 200;
    const auto t0 = Clock::now();
    const DiscoveryOutcome out = discover(spec, t.cfg.topology, t.model, sade, t.cfg.substrate, t.cfg.bounds);
    const double secs = seconds_since(t0);
    const ValidationReport& r = out.validation;
    const CouplerMetrics& a = r.achieved;
    const bool ok = inside(out.search.x_star, t.cfg.bounds) && std::abs(a.coupling_db - c_db) <= 0.25 &&
                    std::abs(a.phase_diff_deg - 90.0) <= 1.5 && a.return_loss_db <= -20.0 &&
                    a.isolation_db <= -20.0 && a.fbw_pct >= min_fbw && secs < seconds_per_spec;
    if (ok) ++met;
    std::cout << "      " << fmt(c_db, 0) << " dB @ " << fmt(f0, 2) << " GHz: C " << fmt(a.coupling_db) << " dB, phase "
              << fmt(a.phase_diff_deg, 2) << " deg, S11 " << fmt(a.return_loss_db, 2) << " dB, S41 "
              << fmt(a.isolation_db, 2) << " dB, FBW " << fmt(a.fbw_pct, 1) << " %, " << fmt(secs, 1) << " s"
              << (ok ? "" : "  <-- not met") << std::endl;
  }
  v.detail = std::to_string(met) + "/" + std::to_string(specs.size()) + " specs met";
  v.require(met == static_cast<int>(specs.size()), "unmet specs");
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Verdict cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "blc_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "run.json") << R"({
    "topology": "folded",
    "threads": 2,
    "dataset": {"n_samples": 120},
    "training": {"epochs": 20, "hidden": [16, 16]},
    "sade": {"np": 20, "generations": 20}
  })";
  const std::string cli = BLC_CLI_PATH;
  const auto run_all = [&](const fs::path& out) {
    const std::string base = cli + " --config " + (root / "run.json").string() + " --out " + out.string();
    const std::vector<std::string> cmds = {
        base + " gen-data",
        base + " train --data " + (out / "dataset.csv").string(),
        base + " discover --model " + (out / "model.json").string(),
        base + " simulate --touchstone --geometry 2.7,9.1,1.7,0.8,1.7",
        base + " metrics --sweep-csv " + (out / "sweep.csv").string(),
    };
    std::string transcript;
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      const fs::path log = out.string() + ".stdout" + std::to_string(i);
      const int status = std::system((cmds[i] + " >" + log.string() + " 2>/dev/null").c_str());
      transcript += "exit " + std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1) + "\n" + slurp(log);
    }
    return transcript;
  };
  const std::string ta = run_all(root / "a");
  const std::string tb = run_all(root / "b");
  Verdict v;
  int files = 0;
  for (const char* f : {"dataset.csv", "model.json", "mae.csv", "design.csv", "validation.json", "sweep.csv",
                        "coupler.s4p"}) {
    const std::string a = slurp(root / "a" / f);
    v.require(!a.empty(), std::string(f) + " missing");
    v.require(a == slurp(root / "b" / f), std::string(f) + " differs");
    ++files;
  }
  v.require(ta == tb, "stdout or exit codes differ");
  v.require(ta.find("exit 0") != std::string::npos && ta.find("exit 2") == std::string::npos &&
                ta.find("exit 3") == std::string::npos,
            "a command failed");
  v.detail = "5 commands x 2 runs with 2 worker threads, " + std::to_string(files) + " artifacts compared";
  fs::remove_all(root);
  return v;
}

}  // namespace

int main() {
  std::cout.setf(std::ios::unitbuf);
  try {
    report(1, "closed-form equivalence", closed_form_equivalence());
    report(2, "matching and isolation law", matching_law());
    report(3, "coupling factor", coupling_factor_check());
    report(4, "quadrature phase", quadrature_phase());
    report(5, "unitarity", unitarity());
    report(6, "gradient check", gradient_check());

    const TrainedSurrogate folded = train_default(Topology::Folded);
    const TrainedSurrogate cascaded = train_default(Topology::Cascaded);
    Verdict quality;
    check_surrogate(quality, folded, 500, 100, 500, 0.3, 2.0, 300.0);
    check_surrogate(quality, cascaded, 3000, 300, 1000, 0.5, 2.5, 900.0);
    report(7, "surrogate quality", quality);

    report(8, "optimizer benchmarks", optimizer_benchmarks());

    std::vector<std::pair<double, double>> folded_specs;
    for (double c : {3.0, 4.0, 6.0}) {
      for (double f : {1.0, 1.25, 1.5}) folded_specs.emplace_back(c, f);
    }
    report(9, "folded discovery", discovery(folded, folded_specs, 0.0, 120.0));
    report(10, "wideband discovery", discovery(cascaded, {{3.0, 2.0}, {3.0, 2.25}, {3.0, 2.5}}, 30.0, 300.0));

    report(11, "CLI determinism", cli_determinism());
  } catch (const std::exception& e) {
    std::cout << "FAIL  acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
