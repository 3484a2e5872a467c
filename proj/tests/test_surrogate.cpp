#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "blc/dataset.hpp"
#include "blc/error.hpp"
#include "blc/surrogate.hpp"

using namespace blc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Normalization symmetric_norm(std::size_t n_inputs, double out_half_range) {
  Normalization n;
  n.inputs.assign(n_inputs, {-1.0, 1.0});
  n.outputs.assign(kNumOutputs, {-out_half_range, out_half_range});
  n.outputs[kPh21Deg] = {-180.0, 180.0};
  n.outputs[kPh31Deg] = {-180.0, 180.0};
  return n;
}

// Flat view over every parameter of a model (or gradient).
std::vector<double*> parameters(std::vector<DenseLayer>& layers) {
  std::vector<double*> p;
  for (auto& L : layers) {
    for (Eigen::Index i = 0; i < L.w.size(); ++i) p.push_back(L.w.data() + i);
    for (Eigen::Index i = 0; i < L.b.size(); ++i) p.push_back(L.b.data() + i);
  }
  return p;
}

// Folded-shaped toy dataset whose outputs are an affine function of the inputs.
Dataset linear_toy(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset d;
  d.kind = Topology::Folded;
  for (std::size_t i = 0; i < n; ++i) {
    SampleRecord r;
    r.x = {1.5 + 1.5 * u(rng), 5.0 + 7.0 * u(rng), 0.3 + 1.7 * u(rng), 0.1 + 1.9 * u(rng), 1.2 + 0.6 * u(rng)};
    r.f_ghz = 0.8 + 0.9 * u(rng);
    const auto& x = r.x;
    r.y = {-20.0 + 2.0 * x[0] - 0.5 * x[1] + 3.0 * r.f_ghz,
           -3.0 + 0.2 * x[2] - 0.1 * x[3],
           -4.0 + 0.3 * x[4] + 0.05 * x[1],
           -25.0 + x[3] + x[0] - 2.0 * r.f_ghz,
           -90.0 + 10.0 * x[2] - 4.0 * x[1],
           40.0 + 5.0 * x[4] + 20.0 * r.f_ghz};
    d.records.push_back(r);
  }
  d.norm = compute_normalization(d.kind, d.records);
  return d;
}

}  // namespace

TEST(Activation, NamesRoundTrip) {
  for (Activation a : {Activation::Tanh, Activation::Silu, Activation::Sigmoid}) {
    EXPECT_EQ(activation_from_string(to_string(a)), a);
  }
  EXPECT_THROW(activation_from_string("relu6"), Error);
}

TEST(Forward, ZeroParametersGiveDenormalizedZero) {
  Normalization n = symmetric_norm(6, 10.0);
  n.outputs[kS11Db] = {-40.0, 0.0};
  MlpModel m = make_model(Topology::Folded, std::vector<int>{8, 8}, Activation::Tanh, n, 1);
  for (auto& L : m.layers) {
    L.w.setZero();
    L.b.setZero();
  }
  const ElectricalVector y = predict(m, std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5}, 0.6);
  EXPECT_DOUBLE_EQ(y[kS11Db], -20.0);
  for (std::size_t k = 1; k < kNumOutputs; ++k) EXPECT_DOUBLE_EQ(y[k], 0.0);
}

TEST(Forward, IdentityLayerReproducesInput) {
  // Six inputs and six outputs, identical normalizers, single linear layer W = I.
  Normalization n = symmetric_norm(6, 180.0);
  n.inputs.assign(6, {-180.0, 180.0});
  MlpModel m = make_model(Topology::Folded, std::vector<int>{}, Activation::Tanh, n, 1);
  m.layers[0].w = MatrixXd::Identity(6, 6);
  m.layers[0].b = VectorXd::Zero(6);
  const std::vector<double> x{-12.5, 3.0, 0.0, 99.0, -170.0};
  const ElectricalVector y = predict(m, x, 45.0);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(y[k], x[k], 1e-12);
  EXPECT_NEAR(y[5], 45.0, 1e-12);
}

TEST(Forward, RejectsWrongInputWidth) {
  MlpModel m = make_model(Topology::Folded, std::vector<int>{4}, Activation::Silu, symmetric_norm(6, 1.0), 1);
  EXPECT_THROW(forward(m, std::vector<double>{1.0, 2.0}), Error);
}

TEST(Normalization, AffineRoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  AffineNorm n{VectorXd(4), VectorXd(4)};
  n.lo << -80.0, -3.0, 0.5, -180.0;
  n.hi << 0.0, -1.0, 12.0, 180.0;
  for (int t = 0; t < 1000; ++t) {
    VectorXd y(4);
    for (int k = 0; k < 4; ++k) y(k) = u(rng);
    const VectorXd back = n.invert(n.apply(y));
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(back(k), y(k), 1e-12 * std::max(1.0, std::abs(y(k))));
  }
  const VectorXd lo_mapped = n.apply(n.lo);
  const VectorXd hi_mapped = n.apply(n.hi);
  for (int k = 0; k < 4; ++k) {
    EXPECT_DOUBLE_EQ(lo_mapped(k), -1.0);
    EXPECT_DOUBLE_EQ(hi_mapped(k), 1.0);
  }
}

TEST(Gradient, MatchesCentralFiniteDifferences) {
  std::mt19937_64 rng(2025);
  std::uniform_int_distribution<int> depth(0, 3);
  std::uniform_int_distribution<int> width(1, 16);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Activation acts[] = {Activation::Tanh, Activation::Silu, Activation::Sigmoid};
  constexpr double kStep = 1e-5;
  for (int trial = 0; trial < 120; ++trial) {
    const Topology kind = trial % 2 ? Topology::Cascaded : Topology::Folded;
    std::vector<int> hidden(static_cast<std::size_t>(depth(rng)));
    for (int& h : hidden) h = width(rng);
    const Normalization norm = symmetric_norm(parameter_count(kind) + 1, 5.0);
    MlpModel m = make_model(kind, hidden, acts[trial % 3], norm, static_cast<std::uint64_t>(trial));
    Batch b{MatrixXd(m.input_dim(), 7), MatrixXd(m.output_dim(), 7)};
    for (Eigen::Index i = 0; i < b.inputs.size(); ++i) b.inputs.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < b.targets.size(); ++i) b.targets.data()[i] = 0.9 * u(rng);

    Gradient g = gradient(m, b);
    auto params = parameters(m.layers);
    auto grads = parameters(g.layers);
    ASSERT_EQ(params.size(), grads.size());
    double diff2 = 0.0;
    double norm_bp = 0.0;
    double norm_fd = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = *params[i];
      *params[i] = saved + kStep;
      const double up = batch_loss(m, b);
      *params[i] = saved - kStep;
      const double down = batch_loss(m, b);
      *params[i] = saved;
      const double fd = (up - down) / (2.0 * kStep);
      diff2 += (fd - *grads[i]) * (fd - *grads[i]);
      norm_bp += *grads[i] * *grads[i];
      norm_fd += fd * fd;
    }
    const double rel = std::sqrt(diff2) / std::max({std::sqrt(norm_bp), std::sqrt(norm_fd), 1e-300});
    EXPECT_LT(rel, 1e-4) << "trial " << trial;
  }
}

TEST(Gradient, ZeroErrorGivesZeroGradient) {
  MlpModel m = make_model(Topology::Folded, std::vector<int>{5, 5}, Activation::Silu, symmetric_norm(6, 1.0), 3);
  Batch b{MatrixXd::Random(6, 4), MatrixXd()};
  b.targets = forward_normalized(m, b.inputs);
  const Gradient g = gradient(m, b);
  for (const auto& L : g.layers) {
    EXPECT_EQ(L.w.norm(), 0.0);
    EXPECT_EQ(L.b.norm(), 0.0);
  }
}

TEST(Gradient, SingleLinearLayerHasResidualForm) {
  MlpModel m = make_model(Topology::Folded, std::vector<int>{}, Activation::Tanh, symmetric_norm(6, 1.0), 8);
  Batch b{MatrixXd::Random(6, 9), MatrixXd::Random(6, 9) * 0.5};
  const MatrixXd r = (m.layers[0].w * b.inputs).colwise() + m.layers[0].b - b.targets;
  const double scale = 2.0 / static_cast<double>(r.size());
  const Gradient g = gradient(m, b);
  EXPECT_LT((g.layers[0].w - scale * r * b.inputs.transpose()).norm(), 1e-13);
  EXPECT_LT((g.layers[0].b - scale * r.rowwise().sum()).norm(), 1e-13);
}

TEST(Loss, PhaseResidualIsWrapped) {
  // Targets of +179 deg and predictions of -179 deg differ by 2 deg, not 358.
  MlpModel m = make_model(Topology::Folded, std::vector<int>{}, Activation::Tanh, symmetric_norm(6, 1.0), 1);
  m.layers[0].w.setZero();
  m.layers[0].b.setZero();
  m.layers[0].b(kPh21Deg) = -179.0 / 180.0;
  Batch b{MatrixXd::Zero(6, 1), MatrixXd::Zero(6, 1)};
  b.targets(kPh21Deg, 0) = 179.0 / 180.0;
  const double expected = std::pow(2.0 / 180.0, 2) / 6.0;
  EXPECT_NEAR(batch_loss(m, b), expected, 1e-15);
}

TEST(Train, LinearToyIsFitAlmostExactly) {
  const Dataset d = linear_toy(200, 1);
  TrainConfig cfg;
  cfg.hidden = {};
  cfg.epochs = 400;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 20;
  const auto [m, report] = train(d, d, cfg);
  EXPECT_LT(batch_loss(m, make_batch(m, d.records)), 1e-6);
  EXPECT_LT(report.epoch_loss.back(), report.epoch_loss.front());
}

TEST(Train, LossDecreasesOnToyWithHiddenLayers) {
  const Dataset d = linear_toy(120, 2);
  TrainConfig cfg;
  cfg.hidden = {16, 16};
  cfg.epochs = 60;
  const auto [m, report] = train(d, d, cfg);
  ASSERT_EQ(report.epoch_loss.size(), 60u);
  for (std::size_t e = 5; e < report.epoch_loss.size(); ++e) EXPECT_LE(report.epoch_loss[e], report.epoch_loss[0]);
  EXPECT_LT(report.epoch_loss.back(), 0.05 * report.epoch_loss.front());
}

TEST(Train, DeterministicGivenSeed) {
  const Dataset d = generate(Topology::Folded, Substrate{}, 60, {0.8, 1.7}, 4).data;
  TrainConfig cfg;
  cfg.hidden = {12, 12};
  cfg.epochs = 5;
  cfg.seed = 17;
  const auto a = train(d, d, cfg).first;
  const auto b = train(d, d, cfg).first;
  EXPECT_EQ(model_to_string(a), model_to_string(b));
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    EXPECT_TRUE((a.layers[l].w.array() == b.layers[l].w.array()).all());
    EXPECT_TRUE((a.layers[l].b.array() == b.layers[l].b.array()).all());
  }
  cfg.seed = 18;
  EXPECT_NE(model_to_string(train(d, d, cfg).first), model_to_string(a));
}

TEST(Train, InvalidConfigsAreRejected) {
  const Dataset d = linear_toy(20, 3);
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(train(d, d, cfg), Error);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(train(d, d, cfg), Error);
  cfg = {};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(train(d, d, cfg), Error);
}

TEST(Mae, ZeroPredictorGivesMeanAbsoluteTarget) {
  const Dataset d = linear_toy(50, 5);
  MlpModel m = make_model(Topology::Folded, std::vector<int>{3}, Activation::Tanh, symmetric_norm(6, 100.0), 1);
  for (auto& L : m.layers) {
    L.w.setZero();
    L.b.setZero();
  }
  const ElectricalVector mae = evaluate_mae(m, d);
  for (std::size_t k = 0; k < kNumOutputs; ++k) {
    double sum = 0.0;
    for (const auto& r : d.records) sum += std::abs(r.y[k]);
    EXPECT_NEAR(mae[k], sum / 50.0, 1e-12);
  }
}

TEST(Mae, ExactModelAndPermutationInvariance) {
  Dataset d = linear_toy(40, 6);
  TrainConfig cfg;
  cfg.hidden = {8};
  cfg.epochs = 3;
  const MlpModel m = train(d, d, cfg).first;
  Dataset exact = d;
  for (auto& r : exact.records) r.y = predict(m, r.x, r.f_ghz);
  for (double v : evaluate_mae(m, exact)) EXPECT_EQ(v, 0.0);
  const ElectricalVector before = evaluate_mae(m, d);
  std::reverse(d.records.begin(), d.records.end());
  const ElectricalVector after = evaluate_mae(m, d);
  for (std::size_t k = 0; k < kNumOutputs; ++k) EXPECT_NEAR(before[k], after[k], 1e-12);
}

TEST(Mae, PhaseErrorIsMeasuredOnTheCircle) {
  Dataset d = linear_toy(10, 7);
  MlpModel m = make_model(Topology::Folded, std::vector<int>{}, Activation::Tanh, symmetric_norm(6, 100.0), 1);
  m.layers[0].w.setZero();
  m.layers[0].b.setZero();
  m.layers[0].b(kPh21Deg) = 179.0 / 180.0;
  for (auto& r : d.records) r.y[kPh21Deg] = -179.0;
  EXPECT_NEAR(evaluate_mae(m, d)[kPh21Deg], 2.0, 1e-9);
}

TEST(ModelFile, RoundTripIsBitwise) {
  const Dataset d = generate(Topology::Cascaded, Substrate{2.2, 0.0009, 1.575}, 40, {1.4, 3.2}, 2).data;
  TrainConfig cfg;
  cfg.hidden = {10, 7};
  cfg.epochs = 2;
  const MlpModel m = train(d, d, cfg).first;
  const std::string text = model_to_string(m);
  const MlpModel back = model_from_string(text);
  EXPECT_EQ(back.topology, Topology::Cascaded);
  EXPECT_EQ(back.layer_sizes, m.layer_sizes);
  EXPECT_EQ(model_to_string(back), text);
  for (const auto& r : d.records) EXPECT_EQ(predict(back, r.x, r.f_ghz), predict(m, r.x, r.f_ghz));
}

TEST(ModelFile, CorruptInputIsAnErrorNotACrash) {
  const MlpModel m = make_model(Topology::Folded, std::vector<int>{4}, Activation::Silu, symmetric_norm(6, 1.0), 1);
  const std::string text = model_to_string(m);
  for (std::size_t cut : {std::size_t{0}, std::size_t{10}, text.size() / 2, text.size() - 3}) {
    try {
      model_from_string(text.substr(0, cut));
      FAIL() << "cut at " << cut;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Parse);
    }
  }
  std::string bumped = text;
  bumped.replace(bumped.find("\"format_version\": 1"), 19, "\"format_version\": 7");
  try {
    model_from_string(bumped);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedVersion);
  }
  EXPECT_THROW(model_from_string("{\"format_version\": 1}"), Error);
  EXPECT_THROW(load_model("/nonexistent/model.json"), Error);
}
