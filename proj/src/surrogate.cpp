#include "blc/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "blc/error.hpp"
#include "blc/random.hpp"

namespace blc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Silu: return "silu";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "unknown";
}

Activation activation_from_string(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "silu") return Activation::Silu;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw Error(ErrorKind::Config, "unknown activation '" + std::string(name) + "'");
}

VectorXd AffineNorm::apply(const VectorXd& v) const {
  return (2.0 * (v - lo).array() / (hi - lo).array() - 1.0).matrix();
}

VectorXd AffineNorm::invert(const VectorXd& z) const {
  return ((z.array() + 1.0) * 0.5 * (hi - lo).array() + lo.array()).matrix();
}

MatrixXd AffineNorm::apply_columns(const MatrixXd& m) const {
  const VectorXd scale = 2.0 * (hi - lo).cwiseInverse();
  return ((m.colwise() - lo).array().colwise() * scale.array() - 1.0).matrix();
}

namespace {

MatrixXd activate(Activation a, const MatrixXd& z) {
  switch (a) {
    case Activation::Tanh: return z.array().tanh().matrix();
    case Activation::Sigmoid: return (1.0 / (1.0 + (-z.array()).exp())).matrix();
    case Activation::Silu: return (z.array() / (1.0 + (-z.array()).exp())).matrix();
  }
  return z;
}

MatrixXd activate_derivative(Activation a, const MatrixXd& z) {
  switch (a) {
    case Activation::Tanh: return (1.0 - z.array().tanh().square()).matrix();
    case Activation::Sigmoid: {
      const auto s = 1.0 / (1.0 + (-z.array()).exp());
      return (s * (1.0 - s)).matrix();
    }
    case Activation::Silu: {
      const auto s = 1.0 / (1.0 + (-z.array()).exp());
      return (s * (1.0 + z.array() * (1.0 - s))).matrix();
    }
  }
  return MatrixXd::Ones(z.rows(), z.cols());
}

// Period of each output column in normalized units; 0 for non-periodic.
VectorXd normalized_periods(const MlpModel& m) {
  VectorXd p = VectorXd::Zero(m.output_dim());
  for (std::size_t k : m.periodic_outputs) {
    const auto i = static_cast<Eigen::Index>(k);
    p(i) = 2.0 * kPhasePeriodDeg / (m.output_norm.hi(i) - m.output_norm.lo(i));
  }
  return p;
}

MatrixXd residual(const MlpModel& m, const MatrixXd& pred, const MatrixXd& targets) {
  MatrixXd d = pred - targets;
  const VectorXd periods = normalized_periods(m);
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    const double p = periods(r);
    if (p == 0.0) continue;
    for (Eigen::Index c = 0; c < d.cols(); ++c) d(r, c) -= p * std::round(d(r, c) / p);
  }
  return d;
}

VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void MlpModel::validate() const {
  if (layer_sizes.size() < 2) throw Error(ErrorKind::Shape, "model needs at least an input and an output layer");
  if (layers.size() + 1 != layer_sizes.size()) throw Error(ErrorKind::Shape, "layer count does not match layer_sizes");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    if (L.w.rows() != layer_sizes[l + 1] || L.w.cols() != layer_sizes[l] || L.b.size() != layer_sizes[l + 1]) {
      throw Error(ErrorKind::Shape, "layer " + std::to_string(l) + " has inconsistent dimensions");
    }
    if (!L.w.allFinite() || !L.b.allFinite()) {
      throw Error(ErrorKind::Shape, "layer " + std::to_string(l) + " has non-finite parameters");
    }
  }
  const auto check_norm = [](const AffineNorm& n, int dim, const char* what) {
    if (n.lo.size() != dim || n.hi.size() != dim) {
      throw Error(ErrorKind::Shape, std::string(what) + " normalizer has wrong dimension");
    }
    if (!((n.hi - n.lo).array() > 0.0).all()) {
      throw Error(ErrorKind::Shape, std::string(what) + " normalizer is not invertible");
    }
  };
  check_norm(input_norm, input_dim(), "input");
  check_norm(output_norm, output_dim(), "output");
  for (std::size_t k : periodic_outputs) {
    if (k >= static_cast<std::size_t>(output_dim())) throw Error(ErrorKind::Shape, "periodic output index out of range");
  }
}

MlpModel make_model(Topology kind, std::span<const int> hidden, Activation act, const Normalization& norm,
                    std::uint64_t seed) {
  MlpModel m;
  m.topology = kind;
  m.activation = act;
  m.layer_sizes.push_back(static_cast<int>(parameter_count(kind) + 1));
  for (int h : hidden) {
    if (h < 1) throw Error(ErrorKind::Config, "hidden layer widths must be positive");
    m.layer_sizes.push_back(h);
  }
  m.layer_sizes.push_back(static_cast<int>(kNumOutputs));
  if (norm.inputs.size() != static_cast<std::size_t>(m.input_dim()) || norm.outputs.size() != kNumOutputs) {
    throw Error(ErrorKind::Shape, "normalization does not match the topology");
  }
  const auto to_norm = [](const std::vector<ColumnRange>& cols) {
    AffineNorm n{VectorXd(static_cast<Eigen::Index>(cols.size())), VectorXd(static_cast<Eigen::Index>(cols.size()))};
    for (std::size_t i = 0; i < cols.size(); ++i) {
      n.lo(static_cast<Eigen::Index>(i)) = cols[i].min;
      n.hi(static_cast<Eigen::Index>(i)) = cols[i].max;
    }
    return n;
  };
  m.input_norm = to_norm(norm.inputs);
  m.output_norm = to_norm(norm.outputs);
  m.periodic_outputs = {kPh21Deg, kPh31Deg};

  Engine eng(derive_seed({seed, 0x494e4954ULL}));
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    const int fan_in = m.layer_sizes[l];
    const int fan_out = m.layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    DenseLayer layer{MatrixXd(fan_out, fan_in), VectorXd(fan_out)};
    for (Eigen::Index r = 0; r < fan_out; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) layer.w(r, c) = uniform(eng, -bound, bound);
    }
    for (Eigen::Index r = 0; r < fan_out; ++r) layer.b(r) = uniform(eng, -bound, bound);
    m.layers.push_back(std::move(layer));
  }
  m.validate();
  return m;
}

MatrixXd forward_normalized(const MlpModel& m, const MatrixXd& inputs) {
  MatrixXd a = inputs;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    MatrixXd z = (m.layers[l].w * a).colwise() + m.layers[l].b;
    a = (l + 1 < m.layers.size()) ? activate(m.activation, z) : std::move(z);
  }
  return a;
}

VectorXd forward(const MlpModel& m, std::span<const double> x_raw) {
  if (static_cast<int>(x_raw.size()) != m.input_dim()) {
    std::ostringstream os;
    os << "surrogate expects " << m.input_dim() << " inputs, got " << x_raw.size();
    throw Error(ErrorKind::Shape, os.str());
  }
  const VectorXd x = Eigen::Map<const VectorXd>(x_raw.data(), static_cast<Eigen::Index>(x_raw.size()));
  const MatrixXd z = forward_normalized(m, m.input_norm.apply(x));
  VectorXd y = m.output_norm.invert(z.col(0));
  for (std::size_t k : m.periodic_outputs) {
    const auto i = static_cast<Eigen::Index>(k);
    y(i) = wrap_degrees(y(i));
  }
  return y;
}

ElectricalVector predict(const MlpModel& m, std::span<const double> x, double f_ghz) {
  std::vector<double> in(x.begin(), x.end());
  in.push_back(f_ghz);
  const VectorXd y = forward(m, in);
  if (y.size() != static_cast<Eigen::Index>(kNumOutputs)) {
    throw Error(ErrorKind::Shape, "surrogate does not produce six electrical properties");
  }
  ElectricalVector out{};
  for (std::size_t k = 0; k < kNumOutputs; ++k) out[k] = y(static_cast<Eigen::Index>(k));
  return out;
}

Batch make_batch(const MlpModel& m, std::span<const SampleRecord> records) {
  const auto n = static_cast<Eigen::Index>(records.size());
  MatrixXd in(m.input_dim(), n);
  MatrixXd out(m.output_dim(), n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto& r = records[static_cast<std::size_t>(c)];
    if (static_cast<int>(r.x.size()) + 1 != m.input_dim()) throw Error(ErrorKind::Shape, "record dimension mismatch");
    for (std::size_t k = 0; k < r.x.size(); ++k) in(static_cast<Eigen::Index>(k), c) = r.x[k];
    in(m.input_dim() - 1, c) = r.f_ghz;
    for (std::size_t k = 0; k < kNumOutputs; ++k) out(static_cast<Eigen::Index>(k), c) = r.y[k];
  }
  return {m.input_norm.apply_columns(in), m.output_norm.apply_columns(out)};
}

double batch_loss(const MlpModel& m, const Batch& batch) {
  const MatrixXd d = residual(m, forward_normalized(m, batch.inputs), batch.targets);
  return d.squaredNorm() / static_cast<double>(d.size());
}

Gradient gradient(const MlpModel& m, const Batch& batch) {
  if (batch.inputs.cols() == 0) throw Error(ErrorKind::Shape, "gradient of an empty batch");
  if (batch.inputs.rows() != m.input_dim() || batch.targets.rows() != m.output_dim() ||
      batch.targets.cols() != batch.inputs.cols()) {
    throw Error(ErrorKind::Shape, "batch does not match model dimensions");
  }
  const std::size_t n_layers = m.layers.size();
  std::vector<MatrixXd> acts;   // acts[l] = input of layer l
  std::vector<MatrixXd> pre;    // pre-activation of layer l
  acts.reserve(n_layers + 1);
  pre.reserve(n_layers);
  acts.push_back(batch.inputs);
  for (std::size_t l = 0; l < n_layers; ++l) {
    pre.push_back((m.layers[l].w * acts.back()).colwise() + m.layers[l].b);
    acts.push_back(l + 1 < n_layers ? activate(m.activation, pre.back()) : pre.back());
  }

  const MatrixXd d = residual(m, acts.back(), batch.targets);
  MatrixXd delta = (2.0 / static_cast<double>(d.size())) * d;

  Gradient g;
  g.layers.resize(n_layers);
  for (std::size_t l = n_layers; l-- > 0;) {
    g.layers[l].w = delta * acts[l].transpose();
    g.layers[l].b = delta.rowwise().sum();
    if (l > 0) {
      delta = (m.layers[l].w.transpose() * delta).cwiseProduct(activate_derivative(m.activation, pre[l - 1]));
    }
  }
  return g;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorKind::Config, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorKind::Config, "batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::Config, "learning_rate must be > 0");
  if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0)) {
    throw Error(ErrorKind::Config, "final_lr_fraction must lie in (0, 1]");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(adam_eps > 0.0)) {
    throw Error(ErrorKind::Config, "invalid Adam hyper-parameters");
  }
}

std::pair<MlpModel, TrainReport> train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.records.empty()) throw Error(ErrorKind::Validation, "training set is empty");
  if (train_set.kind != val_set.kind) throw Error(ErrorKind::Schema, "training and validation sets differ in topology");

  MlpModel m = make_model(train_set.kind, cfg.hidden, cfg.activation, train_set.norm, cfg.seed);
  const Batch all = make_batch(m, train_set.records);
  const Eigen::Index n = all.inputs.cols();

  std::vector<DenseLayer> mom1;
  std::vector<DenseLayer> mom2;
  for (const auto& L : m.layers) {
    mom1.push_back({MatrixXd::Zero(L.w.rows(), L.w.cols()), VectorXd::Zero(L.b.size())});
    mom2.push_back(mom1.back());
  }

  Engine eng(derive_seed({cfg.seed, 0x4241544348ULL}));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  TrainReport report;
  long step = 0;
  Batch batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr_min = cfg.learning_rate * cfg.final_lr_fraction;
    const double lr = lr_min + 0.5 * (cfg.learning_rate - lr_min) *
                                   (1.0 + std::cos(std::numbers::pi * epoch / static_cast<double>(cfg.epochs)));
    std::shuffle(order.begin(), order.end(), eng);
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index count = std::min<Eigen::Index>(cfg.batch_size, n - start);
      batch.inputs.resize(all.inputs.rows(), count);
      batch.targets.resize(all.targets.rows(), count);
      for (Eigen::Index c = 0; c < count; ++c) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + c)];
        batch.inputs.col(c) = all.inputs.col(src);
        batch.targets.col(c) = all.targets.col(src);
      }
      const double loss = batch_loss(m, batch);
      if (!std::isfinite(loss)) {
        throw Error(ErrorKind::Divergence, "training diverged (non-finite loss) in epoch " + std::to_string(epoch + 1));
      }
      epoch_loss += loss * static_cast<double>(count);
      const Gradient g = gradient(m, batch);
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t l = 0; l < m.layers.size(); ++l) {
        auto update = [&](auto& param, auto& m1, auto& m2, const auto& grad) {
          m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * grad;
          m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
          param.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + cfg.adam_eps);
        };
        update(m.layers[l].w, mom1[l].w, mom2[l].w, g.layers[l].w);
        update(m.layers[l].b, mom1[l].b, mom2[l].b, g.layers[l].b);
      }
    }
    report.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
  }
  for (const auto& L : m.layers) {
    if (!L.w.allFinite() || !L.b.allFinite()) throw Error(ErrorKind::Divergence, "training produced non-finite weights");
  }
  if (!val_set.records.empty()) report.val_mae = evaluate_mae(m, val_set);
  return {std::move(m), std::move(report)};
}

ElectricalVector evaluate_mae(const MlpModel& m, const Dataset& d) {
  if (d.records.empty()) throw Error(ErrorKind::Validation, "cannot evaluate MAE on an empty dataset");
  if (d.kind != m.topology) throw Error(ErrorKind::TopologyMismatch, "dataset and model topologies differ");
  ElectricalVector sum{};
  for (const auto& r : d.records) {
    const ElectricalVector p = predict(m, r.x, r.f_ghz);
    for (std::size_t k = 0; k < kNumOutputs; ++k) {
      const bool periodic = std::find(m.periodic_outputs.begin(), m.periodic_outputs.end(), k) != m.periodic_outputs.end();
      sum[k] += periodic ? std::abs(wrap_degrees(p[k] - r.y[k])) : std::abs(p[k] - r.y[k]);
    }
  }
  for (double& v : sum) v /= static_cast<double>(d.records.size());
  return sum;
}

namespace {

using nlohmann::json;

json vec_to_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd json_to_vec(const json& j) { return to_vector(j.get<std::vector<double>>()); }

}  // namespace

std::string model_to_string(const MlpModel& m) {
  m.validate();
  json j;
  j["format_version"] = kModelFormatVersion;
  j["topology"] = std::string(to_string(m.topology));
  j["layer_sizes"] = m.layer_sizes;
  j["activation"] = std::string(to_string(m.activation));
  j["output_activation"] = "identity";
  j["periodic_outputs"] = m.periodic_outputs;
  j["input_norm"] = {{"min", vec_to_json(m.input_norm.lo)}, {"max", vec_to_json(m.input_norm.hi)}};
  j["output_norm"] = {{"min", vec_to_json(m.output_norm.lo)}, {"max", vec_to_json(m.output_norm.hi)}};
  json layers = json::array();
  for (const auto& L : m.layers) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(L.w.size()));
    for (Eigen::Index r = 0; r < L.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < L.w.cols(); ++c) w.push_back(L.w(r, c));
    }
    layers.push_back({{"weights", w}, {"biases", vec_to_json(L.b)}});
  }
  j["layers"] = layers;
  return j.dump(1) + "\n";
}

MlpModel model_from_string(const std::string& content) {
  json j;
  try {
    j = json::parse(content);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("model file is not valid structured text: ") + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorKind::UnsupportedVersion, "unsupported model format_version " + std::to_string(version) +
                                                     " (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    MlpModel m;
    m.topology = topology_from_string(j.at("topology").get<std::string>());
    m.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    m.activation = activation_from_string(j.at("activation").get<std::string>());
    if (j.at("output_activation").get<std::string>() != "identity") {
      throw Error(ErrorKind::Parse, "only identity output activation is supported");
    }
    m.periodic_outputs = j.at("periodic_outputs").get<std::vector<std::size_t>>();
    m.input_norm = {json_to_vec(j.at("input_norm").at("min")), json_to_vec(j.at("input_norm").at("max"))};
    m.output_norm = {json_to_vec(j.at("output_norm").at("min")), json_to_vec(j.at("output_norm").at("max"))};
    const auto& layers = j.at("layers");
    if (!layers.is_array() || layers.size() + 1 != m.layer_sizes.size()) {
      throw Error(ErrorKind::Shape, "layers array does not match layer_sizes");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto w = layers[l].at("weights").get<std::vector<double>>();
      const int rows = m.layer_sizes[l + 1];
      const int cols = m.layer_sizes[l];
      if (rows < 1 || cols < 1 || w.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        throw Error(ErrorKind::Shape, "layer " + std::to_string(l) + " weight count mismatch");
      }
      DenseLayer L{Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(w.data(), rows, cols),
                   json_to_vec(layers[l].at("biases"))};
      m.layers.push_back(std::move(L));
    }
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("model file is missing or mistypes a field: ") + e.what());
  }
}

void save_model(const MlpModel& m, const std::filesystem::path& path) {
  const std::string content = model_to_string(m);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  os << content;
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << is.rdbuf();
  return model_from_string(buf.str());
}

}  // namespace blc
