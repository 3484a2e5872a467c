#include "blc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "blc/error.hpp"
#include "blc/parallel.hpp"
#include "blc/random.hpp"
#include "blc/text.hpp"

namespace blc {

namespace {

constexpr int kMaxAttempts = 1000;

bool record_is_valid(const ElectricalVector& y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

std::vector<std::string> dataset_columns(Topology kind) {
  auto cols = parameter_names(kind);
  cols.insert(cols.end(), {"f_ghz", "s11_db", "s21_db", "s31_db", "s41_db", "ph21_deg", "ph31_deg"});
  return cols;
}

void validate_bounds(const Bounds& bounds) {
  if (bounds.empty()) throw Error(ErrorKind::Validation, "bounds are empty");
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (!std::isfinite(bounds[i].lo) || !std::isfinite(bounds[i].hi) || !(bounds[i].lo < bounds[i].hi)) {
      std::ostringstream os;
      os << "dimension " << i << ": need finite lo < hi, got [" << bounds[i].lo << ", "
         << bounds[i].hi << "]";
      throw Error(ErrorKind::Validation, os.str());
    }
  }
}

Normalization compute_normalization(Topology kind, std::span<const SampleRecord> records) {
  if (records.empty()) throw Error(ErrorKind::Validation, "cannot normalize an empty dataset");
  const std::size_t nx = parameter_count(kind);
  const auto names = dataset_columns(kind);
  Normalization norm;
  norm.inputs.assign(nx + 1, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
  norm.outputs.assign(kNumOutputs, norm.inputs.front());
  const auto widen = [](ColumnRange& r, double v) {
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
  };
  for (const auto& rec : records) {
    for (std::size_t k = 0; k < nx; ++k) widen(norm.inputs[k], rec.x[k]);
    widen(norm.inputs[nx], rec.f_ghz);
    for (std::size_t k = 0; k < kNumOutputs; ++k) widen(norm.outputs[k], rec.y[k]);
  }
  for (std::size_t k = 0; k < norm.inputs.size() + norm.outputs.size(); ++k) {
    const ColumnRange& r = k < norm.inputs.size() ? norm.inputs[k] : norm.outputs[k - norm.inputs.size()];
    if (!(r.min < r.max)) {
      throw Error(ErrorKind::Validation, "degenerate dataset column '" + names[k] + "' (constant value)");
    }
  }
  return norm;
}

std::vector<std::vector<double>> lhs_sample(const Bounds& bounds, std::size_t n, std::uint64_t seed) {
  validate_bounds(bounds);
  if (n < 1) throw Error(ErrorKind::Validation, "Latin hypercube needs at least one point");
  Engine eng(derive_seed({seed, 0x4c4853ULL}));
  std::vector<std::vector<double>> pts(n, std::vector<double>(bounds.size()));
  std::vector<std::size_t> perm(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t d = 0; d < bounds.size(); ++d) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), eng);
    const double width = bounds[d].hi - bounds[d].lo;
    for (std::size_t i = 0; i < n; ++i) {
      const double unit = (static_cast<double>(perm[i]) + uniform01(eng)) * inv_n;
      pts[i][d] = std::min(bounds[d].lo + unit * width, bounds[d].hi);
    }
  }
  return pts;
}

GenerationResult generate(Topology kind, const Substrate& sub, std::size_t n, Interval f_band,
                          std::uint64_t seed, const Bounds& bounds_in, unsigned threads) {
  if (kind == Topology::Classical) {
    throw Error(ErrorKind::Config, "datasets are generated for the folded or cascaded topology only");
  }
  if (n < 10) throw Error(ErrorKind::Validation, "dataset needs at least 10 samples");
  if (!(f_band.lo > 0.0) || !(f_band.lo < f_band.hi)) {
    throw Error(ErrorKind::Validation, "frequency band must satisfy 0 < lo < hi");
  }
  sub.validate();
  const Bounds bounds = bounds_in.empty() ? default_bounds(kind) : bounds_in;
  if (bounds.size() != parameter_count(kind)) {
    throw Error(ErrorKind::Shape, "bounds dimension does not match the topology");
  }
  validate_bounds(bounds);

  Bounds joint = bounds;
  joint.push_back(f_band);
  const auto design = lhs_sample(joint, n, seed);

  std::vector<SampleRecord> records(n);
  std::vector<std::size_t> attempts(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<double> x(design[i].begin(), design[i].end() - 1);
    double f = design[i].back();
    for (int attempt = 0;; ++attempt) {
      if (attempt > 0) {
        Engine eng(derive_seed({seed, i, static_cast<std::uint64_t>(attempt)}));
        for (std::size_t d = 0; d < x.size(); ++d) x[d] = uniform(eng, bounds[d].lo, bounds[d].hi);
        f = uniform(eng, f_band.lo, f_band.hi);
      }
      if (attempt >= kMaxAttempts) {
        throw Error(ErrorKind::Validation, "design space is degenerate: simulation keeps failing");
      }
      try {
        const ElectricalVector y = electrical_properties(simulate_point(vector_to_geometry(kind, x), sub, f));
        if (record_is_valid(y)) {
          records[i] = {x, f, y};
          attempts[i] = static_cast<std::size_t>(attempt);
          return;
        }
      } catch (const Error& e) {
        if (!is_numerical(e.kind())) throw;
      }
    }
  });

  GenerationResult out;
  out.resamples = std::accumulate(attempts.begin(), attempts.end(), std::size_t{0});
  out.degenerate_space = static_cast<double>(out.resamples) > 0.1 * static_cast<double>(n);
  out.data.kind = kind;
  out.data.norm = compute_normalization(kind, records);
  out.data.records = std::move(records);
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& d, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::Validation, "test fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = d.records.size();
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction));
  if (n_test == 0 || n_test >= n) {
    std::ostringstream os;
    os << "test fraction " << test_fraction << " of " << n << " records leaves an empty part";
    throw Error(ErrorKind::Validation, os.str());
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Engine eng(derive_seed({seed, 0x53504c4954ULL}));
  std::shuffle(idx.begin(), idx.end(), eng);
  std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train_idx(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());

  Dataset train{d.kind, {}, {}};
  Dataset test{d.kind, {}, {}};
  for (auto i : train_idx) train.records.push_back(d.records[i]);
  for (auto i : test_idx) test.records.push_back(d.records[i]);
  train.norm = compute_normalization(d.kind, train.records);
  test.norm = train.norm;
  return {std::move(train), std::move(test)};
}

void save_dataset(std::ostream& os, const Dataset& d) {
  os << "# " << kDatasetVersionTag << " kind=" << to_string(d.kind) << '\n';
  const auto cols = dataset_columns(d.kind);
  for (std::size_t k = 0; k < cols.size(); ++k) os << (k ? "," : "") << cols[k];
  os << '\n';
  for (const auto& r : d.records) {
    for (double v : r.x) os << text::format_double(v) << ',';
    os << text::format_double(r.f_ghz);
    for (double v : r.y) os << ',' << text::format_double(v);
    os << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  save_dataset(os, d);
}

Dataset load_dataset(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](ErrorKind kind, const std::string& what) {
    throw Error(kind, "dataset line " + std::to_string(line_no) + ": " + what);
  };

  if (!std::getline(is, line)) throw Error(ErrorKind::Parse, "dataset file is empty");
  ++line_no;
  const std::string_view tag = text::trim(line);
  const std::string prefix = std::string("# ") + kDatasetVersionTag + " kind=";
  if (tag.rfind("# coupler-dataset ", 0) != 0) fail(ErrorKind::Parse, "missing '# coupler-dataset' tag line");
  if (tag.rfind(prefix, 0) != 0) fail(ErrorKind::UnsupportedVersion, "unsupported dataset version: " + std::string(tag));
  Dataset d;
  d.kind = topology_from_string(tag.substr(prefix.size()));
  if (d.kind == Topology::Classical) fail(ErrorKind::Schema, "classical datasets are not supported");

  if (!std::getline(is, line)) throw Error(ErrorKind::Parse, "dataset file has no header line");
  ++line_no;
  const auto expected = dataset_columns(d.kind);
  const auto header = text::split(text::trim(line), ',');
  for (const auto& col : expected) {
    if (std::find_if(header.begin(), header.end(), [&](std::string_view h) { return text::trim(h) == col; }) ==
        header.end()) {
      fail(ErrorKind::Schema, "missing column '" + col + "'");
    }
  }
  if (header.size() != expected.size()) fail(ErrorKind::Schema, "unexpected extra columns in header");
  for (std::size_t k = 0; k < expected.size(); ++k) {
    if (text::trim(header[k]) != expected[k]) {
      fail(ErrorKind::Schema, "column " + std::to_string(k + 1) + " should be '" + expected[k] + "'");
    }
  }

  const std::size_t nx = parameter_count(d.kind);
  while (std::getline(is, line)) {
    ++line_no;
    const std::string_view view = text::trim(line);
    if (view.empty()) continue;
    const auto fields = text::split(view, ',');
    if (fields.size() != expected.size()) {
      fail(ErrorKind::Schema, "expected " + std::to_string(expected.size()) + " columns, found " +
                                  std::to_string(fields.size()));
    }
    SampleRecord rec;
    rec.x.resize(nx);
    for (std::size_t k = 0; k < fields.size(); ++k) {
      double v = 0.0;
      if (!text::parse_double(fields[k], v) || !std::isfinite(v)) {
        fail(ErrorKind::Parse, "column '" + expected[k] + "' is not a finite number");
      }
      if (k < nx) rec.x[k] = v;
      else if (k == nx) rec.f_ghz = v;
      else rec.y[k - nx - 1] = v;
    }
    for (std::size_t k : {std::size_t{kPh21Deg}, std::size_t{kPh31Deg}}) {
      if (!(rec.y[k] > -180.0 && rec.y[k] <= 180.0)) fail(ErrorKind::Parse, "phase outside (-180, 180]");
    }
    d.records.push_back(std::move(rec));
  }
  if (d.records.empty()) throw Error(ErrorKind::Parse, "dataset has no records");
  d.norm = compute_normalization(d.kind, d.records);
  return d;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  return load_dataset(is);
}

}  // namespace blc
