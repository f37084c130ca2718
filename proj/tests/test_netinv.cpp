#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "shwave/error.hpp"
#include "shwave/netinv.hpp"
#include "shwave/rng.hpp"

using namespace shwave;
using namespace shwave::netinv;

namespace {

std::vector<double> random_values(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

// A random composable stack that exercises every layer kind.
Model random_model(Rng& rng) {
  const int in = 2 + static_cast<int>(rng.below(6));
  const int ch = 1 + static_cast<int>(rng.below(3));
  const int len = 2 + static_cast<int>(rng.below(5));
  const int k = 1 + 2 * static_cast<int>(rng.below(3));
  const int ch2 = 1 + static_cast<int>(rng.below(3));
  const int out = 1 + static_cast<int>(rng.below(5));
  std::vector<LayerSpec> layers{LayerSpec::dense(in, ch * len), LayerSpec::relu(), LayerSpec::reshape(ch, len),
                                LayerSpec::conv1d(ch, ch2, k)};
  if (rng.below(2)) layers.push_back(LayerSpec::relu());
  if (rng.below(2)) layers.push_back(LayerSpec::conv1d(ch2, ch2, 1 + 2 * static_cast<int>(rng.below(2))));
  layers.push_back(LayerSpec::reshape(1, ch2 * len));
  layers.push_back(LayerSpec::dense(ch2 * len, out));
  Model m = Model::build(layers, in);
  m.params = random_values(rng, m.params.size(), 1.0);
  return m;
}

double loss_at(const Model& m, const Tensor& x, const Tensor& y, double lambda) {
  double reg = 0;
  for (double p : m.params) reg += p * p;
  return mse_loss(model_forward(m, x), y) + lambda * reg;
}

std::vector<Example> toy_data(int n, int in, int out, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Example> data;
  for (int i = 0; i < n; ++i) {
    Example e{random_values(rng, static_cast<std::size_t>(in)), {}};
    for (int j = 0; j < out; ++j) e.target.push_back(0.5 * std::sin(e.features[0] * (j + 1)) + 0.2 * e.features[1]);
    data.push_back(e);
  }
  return data;
}

std::vector<LayerSpec> toy_arch(int in, int out) {
  return {LayerSpec::dense(in, 32), LayerSpec::relu(), LayerSpec::reshape(4, 8), LayerSpec::conv1d(4, 4, 3),
          LayerSpec::relu(), LayerSpec::reshape(1, 32), LayerSpec::dense(32, out)};
}

double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST(NetInv, TensorShapeValidation) {
  EXPECT_NO_THROW(Tensor({2, 3}, std::vector<double>(6)));
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), Error);
  EXPECT_THROW(Tensor({0}, {}), Error);
}

TEST(NetInv, BuildRejectsBadCompositions) {
  auto code = [](std::vector<LayerSpec> l, int in) {
    try {
      Model::build(std::move(l), in);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::corrupt_file;  // sentinel: no error
  };
  EXPECT_EQ(code({LayerSpec::dense(4, 3)}, 4), ErrorCode::shape_mismatch);  // no conv1d
  EXPECT_EQ(code({LayerSpec::dense(5, 4), LayerSpec::reshape(2, 2), LayerSpec::conv1d(2, 2, 3)}, 4),
            ErrorCode::shape_mismatch);
  EXPECT_EQ(code({LayerSpec::dense(4, 6), LayerSpec::reshape(2, 2)}, 4), ErrorCode::shape_mismatch);
  EXPECT_EQ(code({LayerSpec::reshape(1, 4), LayerSpec::conv1d(1, 1, 2)}, 4), ErrorCode::shape_mismatch);
  EXPECT_EQ(code({LayerSpec::reshape(2, 2), LayerSpec::conv1d(1, 1, 3)}, 4), ErrorCode::shape_mismatch);
  EXPECT_EQ(code({LayerSpec::reshape(1, 4), LayerSpec::conv1d(1, 1, 3)}, 4), ErrorCode::corrupt_file);
}

TEST(NetInv, DefaultArchitectureShapes) {
  const Model m = Model::build(default_architecture(64, 128), 128);
  EXPECT_EQ(m.input_width, 128);
  EXPECT_EQ(m.output_width(), 128);
  const std::size_t expected = (128 * 256 + 256) + (16 * 32 * 5 + 32) + (32 * 32 * 5 + 32) + (512 * 128 + 128);
  EXPECT_EQ(m.parameter_count(), expected);
}

TEST(NetInv, ZeroFinalLayerGivesZeroOutput) {
  Model m = Model::build(default_architecture(8, 12), 16);
  initialize(m, 3);
  const std::size_t last = m.param_offset.back();
  for (std::size_t i = last; i < m.params.size(); ++i) m.params[i] = 0.0;
  Rng rng(1);
  const Tensor y = model_forward(m, Tensor::vector(random_values(rng, 16, 5.0)));
  for (double v : y.values) EXPECT_EQ(v, 0.0);
}

TEST(NetInv, IdentityConvolutionAndRelu) {
  Model m = Model::build({LayerSpec::reshape(1, 3), LayerSpec::conv1d(1, 1, 3)}, 3);
  m.params = {0.0, 1.0, 0.0, 0.0};
  const std::vector<double> x{-1.0, 0.5, 2.0};
  EXPECT_EQ(model_forward(m, Tensor::vector(x)).values, x);

  Model r = Model::build({LayerSpec::reshape(1, 3), LayerSpec::conv1d(1, 1, 3), LayerSpec::relu()}, 3);
  r.params = {0.0, 1.0, 0.0, 0.0};
  EXPECT_EQ(model_forward(r, Tensor::vector({-1.0, 0.0, 2.0})).values, (std::vector<double>{0.0, 0.0, 2.0}));
}

TEST(NetInv, MseExamples) {
  EXPECT_EQ(mse_loss(Tensor::vector({1, 2}), Tensor::vector({1, 2})), 0.0);
  EXPECT_EQ(mse_loss(Tensor::vector({0, 0}), Tensor::vector({1, 1})), 1.0);
  EXPECT_EQ(mse_loss(Tensor::vector({2}), Tensor::vector({-1})), 9.0);
  EXPECT_THROW(mse_loss(Tensor::vector({2}), Tensor::vector({1, 1})), Error);
}

TEST(NetInv, GradientVanishesAtExactFit) {
  Rng rng(4);
  const Model m = random_model(rng);
  const Tensor x = Tensor::vector(random_values(rng, static_cast<std::size_t>(m.input_width)));
  const Tensor y = Tensor::vector(model_forward(m, x).values);
  const Gradients g = backward(m, x, y, 0.0);
  for (double v : g.values) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(g.loss, 0.0);
}

TEST(NetInv, RegularizerOnlyGradient) {
  Model m = Model::build({LayerSpec::reshape(1, 3), LayerSpec::conv1d(1, 1, 3), LayerSpec::dense(3, 2)}, 3);
  Rng rng(8);
  m.params = random_values(rng, m.params.size());
  // Zero biases so a zero input produces a zero prediction.
  m.params[3] = 0.0;
  m.params[m.params.size() - 1] = m.params[m.params.size() - 2] = 0.0;
  const double lambda = 0.37;
  const Gradients g = backward(m, Tensor::vector({0, 0, 0}), Tensor::vector({0, 0}), lambda);
  for (std::size_t i = 0; i < m.params.size(); ++i) EXPECT_EQ(g.values[i], 2.0 * lambda * m.params[i]);
}

// Central differences with step 1e-4, compared layer by layer.
TEST(NetInv, GradientsMatchFiniteDifferences) {
  Rng rng(99);
  const double h = 1e-4;
  for (int config = 0; config < 50; ++config) {
    Model m = random_model(rng);
    const Tensor x = Tensor::vector(random_values(rng, static_cast<std::size_t>(m.input_width)));
    const Tensor y = Tensor::vector(random_values(rng, static_cast<std::size_t>(m.output_width())));
    const double lambda = rng.below(2) ? 0.0 : rng.uniform(0.0, 0.1);
    const Gradients g = backward(m, x, y, lambda);
    std::vector<double> fd(m.params.size());
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      const double keep = m.params[i];
      m.params[i] = keep + h;
      const double up = loss_at(m, x, y, lambda);
      m.params[i] = keep - h;
      const double down = loss_at(m, x, y, lambda);
      m.params[i] = keep;
      fd[i] = (up - down) / (2 * h);
    }
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      const std::size_t n = layer_parameter_count(m.layers[l]);
      if (n == 0) continue;
      double diff = 0, a = 0, b = 0;
      for (std::size_t i = m.param_offset[l]; i < m.param_offset[l] + n; ++i) {
        diff += (g.values[i] - fd[i]) * (g.values[i] - fd[i]);
        a += g.values[i] * g.values[i];
        b += fd[i] * fd[i];
      }
      const double scale = std::max(std::sqrt(std::max(a, b)), 1e-12);
      EXPECT_LT(std::sqrt(diff) / scale, 1e-4) << "config " << config << " layer " << l << " ("
                                                << to_string(m.layers[l].kind) << ")";
    }
  }
}

TEST(NetInv, AdamExamples) {
  std::vector<double> p{0.3, -1.2};
  AdamState s;
  adam_step(p, {0.0, 0.0}, s, 1e-3);
  EXPECT_EQ(p, (std::vector<double>{0.3, -1.2}));

  for (double g : {2.5, -0.01, 40.0}) {
    std::vector<double> q{1.0};
    AdamState st;
    adam_step(q, {g}, st, 1e-3);
    // m_hat = g, v_hat = g^2 after bias correction.
    EXPECT_NEAR(q[0], 1.0 - 1e-3 * g / (std::abs(g) + kAdamEpsilon), 1e-15);
    EXPECT_NEAR(1.0 - q[0], 1e-3 * (g > 0 ? 1 : -1), 1e-9);
  }

  std::vector<double> a{0.5, 0.25}, b{0.5, 0.25};
  AdamState sa, sb;
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> g{std::sin(i * 0.1), std::cos(i * 0.3)};
    adam_step(a, g, sa, 1e-2);
    adam_step(b, g, sb, 1e-2);
  }
  EXPECT_EQ(a, b);
}

TEST(NetInv, InitializationIsSeededGlorot) {
  Model a = Model::build(default_architecture(8, 12), 16), b = a, c = a;
  initialize(a, 5);
  initialize(b, 5);
  initialize(c, 6);
  EXPECT_EQ(a.params, b.params);
  EXPECT_NE(a.params, c.params);
  const double limit = std::sqrt(6.0 / (16 + 256));
  for (std::size_t i = 0; i < 16 * 256; ++i) EXPECT_LE(std::abs(a.params[i]), limit);
  for (std::size_t i = 16 * 256; i < 16 * 256 + 256; ++i) EXPECT_EQ(a.params[i], 0.0);
}

TEST(NetInv, OverfitsTinySet) {
  const auto data = toy_data(12, 6, 5, 1);
  std::vector<std::size_t> train_idx{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, val{10, 11};
  Model m = Model::build(toy_arch(6, 5), 6);
  initialize(m, 2);
  TrainConfig c;
  c.learning_rate = 3e-3;
  c.weight_decay_lambda = 0.0;
  c.batch_size = 10;
  c.max_epochs = 500;
  c.early_stop_patience = 500;
  const TrainResult r = train(m, data, train_idx, val, c);
  ASSERT_EQ(r.history.size(), 500u);
  // history[0] is the loss of the initial parameters (measured before the first update).
  EXPECT_LT(r.history.back().train_mse, 1e-4 * r.history.front().train_mse);
}

TEST(NetInv, FullBatchSmallStepDescends) {
  const auto data = toy_data(20, 6, 5, 2);
  std::vector<std::size_t> train_idx, val{18, 19};
  for (std::size_t i = 0; i < 18; ++i) train_idx.push_back(i);
  Model m = Model::build(toy_arch(6, 5), 6);
  initialize(m, 3);
  TrainConfig c;
  c.learning_rate = 1e-5;
  c.batch_size = 18;
  c.max_epochs = 60;
  c.early_stop_patience = 100;
  const TrainResult r = train(m, data, train_idx, val, c);
  ASSERT_EQ(r.history.size(), 60u);
  for (std::size_t e = 1; e < r.history.size(); ++e) EXPECT_LE(r.history[e].train_mse, r.history[e - 1].train_mse);
}

TEST(NetInv, TrainingIsDeterministicAndWorkerIndependent) {
  const auto data = toy_data(40, 6, 5, 3);
  std::vector<std::size_t> train_idx, val;
  for (std::size_t i = 0; i < 40; ++i) (i < 34 ? train_idx : val).push_back(i);
  Model m = Model::build(toy_arch(6, 5), 6);
  initialize(m, 4);
  TrainConfig c;
  c.batch_size = 8;
  c.max_epochs = 15;
  const TrainResult a = train(m, data, train_idx, val, c);
  const TrainResult b = train(m, data, train_idx, val, c);
  c.workers = 3;
  const TrainResult w = train(m, data, train_idx, val, c);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t e = 0; e < a.history.size(); ++e) {
    EXPECT_EQ(a.history[e].train_mse, b.history[e].train_mse);
    EXPECT_EQ(a.history[e].validation_mse, b.history[e].validation_mse);
    EXPECT_EQ(a.history[e].train_mse, w.history[e].train_mse);
  }
  EXPECT_EQ(a.model.params, b.model.params);
  EXPECT_EQ(a.model.params, w.model.params);
}

TEST(NetInv, StrongerRegularizerShrinksParameters) {
  const auto data = toy_data(40, 6, 5, 4);
  std::vector<std::size_t> train_idx, val;
  for (std::size_t i = 0; i < 40; ++i) (i < 34 ? train_idx : val).push_back(i);
  Model m = Model::build(toy_arch(6, 5), 6);
  initialize(m, 5);
  TrainConfig c;
  c.max_epochs = 80;
  c.early_stop_patience = 1000;
  c.weight_decay_lambda = 1e-5;
  const double weak = norm2(train(m, data, train_idx, val, c).model.params);
  c.weight_decay_lambda = 1e-1;
  const double strong = norm2(train(m, data, train_idx, val, c).model.params);
  EXPECT_LE(strong, weak);
}

TEST(NetInv, EarlyStoppingKeepsBestEpoch) {
  const auto data = toy_data(40, 6, 5, 6);
  std::vector<std::size_t> train_idx, val;
  for (std::size_t i = 0; i < 40; ++i) (i < 30 ? train_idx : val).push_back(i);
  Model m = Model::build(toy_arch(6, 5), 6);
  initialize(m, 6);
  TrainConfig c;
  c.learning_rate = 1e-2;
  c.max_epochs = 400;
  c.early_stop_patience = 10;
  const TrainResult r = train(m, data, train_idx, val, c);
  double best = 1e300;
  int best_epoch = 0;
  for (const auto& h : r.history)
    if (h.validation_mse < best) best = h.validation_mse, best_epoch = h.epoch;
  EXPECT_EQ(r.best_epoch, best_epoch);
  EXPECT_EQ(r.best_validation_mse, best);
  if (static_cast<int>(r.history.size()) < c.max_epochs)
    EXPECT_EQ(static_cast<int>(r.history.size()), best_epoch + c.early_stop_patience);
}

TEST(NetInv, DivergenceIsReported) {
  const auto data = toy_data(20, 6, 5, 7);
  std::vector<std::size_t> train_idx{0, 1, 2, 3, 4, 5, 6, 7}, val{8, 9};
  Model m = Model::build(toy_arch(6, 5), 6);
  initialize(m, 7);
  TrainConfig c;
  c.learning_rate = 1e200;
  c.max_epochs = 10;
  try {
    train(m, data, train_idx, val, c);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::divergence);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(NetInv, TrainRejectsBadInputs) {
  const auto data = toy_data(10, 6, 5, 8);
  Model m = Model::build(toy_arch(6, 5), 6);
  TrainConfig c;
  EXPECT_THROW(train(m, data, {0, 1, 2}, {2, 3}, c), std::invalid_argument);
  c.batch_size = 0;
  EXPECT_THROW(train(m, data, {0, 1, 2}, {3}, c), std::invalid_argument);
  Model wrong = Model::build(toy_arch(7, 5), 7);
  EXPECT_THROW(train(wrong, data, {0, 1, 2}, {3}, TrainConfig{}), Error);
}

TEST(NetInv, PredictContract) {
  const PlateSpec p;
  const SpatialGrid grid{-1.0, 0.25, 8};
  const WavenumberGrid band = WavenumberGrid::linear(p, 0.1, 1.5, 4);
  Model m = Model::build({LayerSpec::dense(8, 16), LayerSpec::relu(), LayerSpec::reshape(2, 8),
                          LayerSpec::conv1d(2, 1, 3), LayerSpec::reshape(1, 8), LayerSpec::dense(8, 8)},
                         8);
  initialize(m, 9);
  Rng rng(9);
  ReflectionSpectrum y{band, {}};
  for (int i = 0; i < 4; ++i) y.coefficients.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1));
  try {
    predict(m, y, grid, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unstandardized_model);
  }
  m.standardization = Standardization{std::vector<double>(8, 0.1), std::vector<double>(8, 0.01)};
  const auto a = predict(m, y, grid, p);
  const auto b = predict(m, y, grid, p);
  EXPECT_EQ(a.depths, b.depths);
  for (double d : a.depths) {
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 0.8 * p.depth());
  }
  // Features are all real parts first, then imaginary parts.
  const auto f = spectrum_features(y);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(f[i], y.coefficients[i].real());
    EXPECT_EQ(f[4 + i], y.coefficients[i].imag());
  }
}

TEST(NetInv, DefaultModelPredictsQuickly) {
  const PlateSpec p;
  Model m = Model::build(default_architecture(64, 128), 128);
  initialize(m, 1);
  m.standardization = Standardization{std::vector<double>(128, 0.0), std::vector<double>(128, 1.0)};
  ReflectionSpectrum y{WavenumberGrid::linear(p), std::vector<cplx>(64, cplx(0.1, -0.2))};
  const auto t0 = std::chrono::steady_clock::now();
  const auto d = predict(m, y, SpatialGrid::centered(p), p);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(d.depths.size(), 128u);
  EXPECT_LT(s, 1.0);
}

TEST(NetInv, FitStandardization) {
  std::vector<Example> data{{{1.0, 5.0}, {}}, {{3.0, 5.0}, {}}, {{100.0, 100.0}, {}}};
  const Standardization s = fit_standardization(data, {0, 1});
  EXPECT_EQ(s.mean, (std::vector<double>{2.0, 5.0}));
  EXPECT_EQ(s.scale[0], 1.0);
  EXPECT_EQ(s.scale[1], 1.0);  // constant feature keeps unit scale
}
