#include "shwave/netinv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "shwave/error.hpp"
#include "shwave/rng.hpp"

namespace shwave::netinv {

namespace {

[[noreturn]] void shape_error(const std::string& msg) { throw Error(ErrorCode::shape_mismatch, msg); }

std::size_t weight_count(const LayerSpec& s) {
  switch (s.kind) {
    case LayerKind::dense: return static_cast<std::size_t>(s.in) * s.out;
    case LayerKind::conv1d:
      return static_cast<std::size_t>(s.out_channels) * s.in_channels * s.kernel;
    default: return 0;
  }
}

std::size_t bias_count(const LayerSpec& s) {
  switch (s.kind) {
    case LayerKind::dense: return static_cast<std::size_t>(s.out);
    case LayerKind::conv1d: return static_cast<std::size_t>(s.out_channels);
    default: return 0;
  }
}

// Activation buffers for one forward/backward pass.
struct Workspace {
  std::vector<std::vector<double>> acts;  // acts[l] = input of layer l
  std::vector<double> grad_a, grad_b;
};

void forward_pass(const Model& model, const double* params, const double* input, Workspace& ws) {
  const std::size_t n_layers = model.layers.size();
  ws.acts.resize(n_layers + 1);
  ws.acts[0].assign(input, input + model.input_width);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const LayerSpec& s = model.layers[l];
    const std::vector<double>& x = ws.acts[l];
    std::vector<double>& y = ws.acts[l + 1];
    const ActivationShape& in_shape = model.shapes[l];
    const ActivationShape& out_shape = model.shapes[l + 1];
    y.assign(static_cast<std::size_t>(out_shape.size()), 0.0);
    const double* w = params + model.param_offset[l];
    switch (s.kind) {
      case LayerKind::dense: {
        const double* bias = w + weight_count(s);
        for (int o = 0; o < s.out; ++o) {
          const double* row = w + static_cast<std::size_t>(o) * s.in;
          double acc = 0.0;
          for (int i = 0; i < s.in; ++i) acc += row[i] * x[static_cast<std::size_t>(i)];
          y[static_cast<std::size_t>(o)] = acc + bias[o];
        }
        break;
      }
      case LayerKind::conv1d: {
        const int len = in_shape.length;
        const int pad = s.kernel / 2;
        const double* bias = w + weight_count(s);
        for (int o = 0; o < s.out_channels; ++o) {
          double* yo = y.data() + static_cast<std::size_t>(o) * len;
          std::fill(yo, yo + len, bias[o]);
          for (int c = 0; c < s.in_channels; ++c) {
            const double* xc = x.data() + static_cast<std::size_t>(c) * len;
            const double* wk = w + (static_cast<std::size_t>(o) * s.in_channels + c) * s.kernel;
            for (int j = 0; j < s.kernel; ++j) {
              const int shift = j - pad;
              const int lo = std::max(0, -shift);
              const int hi = std::min(len, len - shift);
              const double wj = wk[j];
              for (int t = lo; t < hi; ++t) yo[t] += wj * xc[t + shift];
            }
          }
        }
        break;
      }
      case LayerKind::relu:
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
        break;
      case LayerKind::reshape:
        y = x;
        break;
    }
  }
}

// Backpropagates d(loss)/d(output) held in ws.grad_a into `grad` (same layout
// as params, assumed zeroed for this sample).
void backward_pass(const Model& model, const double* params, Workspace& ws, double* grad) {
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const LayerSpec& s = model.layers[l];
    const std::vector<double>& x = ws.acts[l];
    const std::vector<double>& gy = ws.grad_a;
    std::vector<double>& gx = ws.grad_b;
    gx.assign(x.size(), 0.0);
    const double* w = params + model.param_offset[l];
    double* gw = grad + model.param_offset[l];
    switch (s.kind) {
      case LayerKind::dense: {
        double* gb = gw + weight_count(s);
        for (int o = 0; o < s.out; ++o) {
          const double g = gy[static_cast<std::size_t>(o)];
          gb[o] += g;
          const double* row = w + static_cast<std::size_t>(o) * s.in;
          double* grow = gw + static_cast<std::size_t>(o) * s.in;
          for (int i = 0; i < s.in; ++i) {
            grow[i] += g * x[static_cast<std::size_t>(i)];
            gx[static_cast<std::size_t>(i)] += row[i] * g;
          }
        }
        break;
      }
      case LayerKind::conv1d: {
        const int len = model.shapes[l].length;
        const int pad = s.kernel / 2;
        double* gb = gw + weight_count(s);
        for (int o = 0; o < s.out_channels; ++o) {
          const double* go = gy.data() + static_cast<std::size_t>(o) * len;
          gb[o] += std::accumulate(go, go + len, 0.0);
          for (int c = 0; c < s.in_channels; ++c) {
            const double* xc = x.data() + static_cast<std::size_t>(c) * len;
            double* gxc = gx.data() + static_cast<std::size_t>(c) * len;
            const std::size_t base = (static_cast<std::size_t>(o) * s.in_channels + c) * s.kernel;
            for (int j = 0; j < s.kernel; ++j) {
              const int shift = j - pad;
              const int lo = std::max(0, -shift);
              const int hi = std::min(len, len - shift);
              const double wj = w[base + j];
              double acc = 0.0;
              for (int t = lo; t < hi; ++t) {
                acc += go[t] * xc[t + shift];
                gxc[t + shift] += wj * go[t];
              }
              gw[base + j] += acc;
            }
          }
        }
        break;
      }
      case LayerKind::relu:
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = x[i] > 0.0 ? gy[i] : 0.0;
        break;
      case LayerKind::reshape:
        gx = gy;
        break;
    }
    std::swap(ws.grad_a, ws.grad_b);
  }
}

// Data-term gradient of one sample into `grad` (overwritten); returns its MSE.
double sample_gradient(const Model& model, const double* params, const double* input,
                       const std::vector<double>& target, Workspace& ws, std::vector<double>& grad) {
  forward_pass(model, params, input, ws);
  const std::vector<double>& pred = ws.acts.back();
  const double n = static_cast<double>(pred.size());
  ws.grad_a.resize(pred.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    loss += diff * diff;
    ws.grad_a[i] = 2.0 * diff / n;
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  backward_pass(model, params, ws, grad.data());
  return loss / n;
}

double squared_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

std::vector<double> standardize(const Standardization& st, const std::vector<double>& raw) {
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - st.mean[i]) / st.scale[i];
  return out;
}

}  // namespace

Tensor::Tensor(std::vector<int> s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) shape_error("tensor dimensions must be positive");
    n *= static_cast<std::size_t>(d);
  }
  if (n != values.size()) shape_error("tensor shape does not match value count");
}

Tensor Tensor::vector(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return Tensor({n}, std::move(v));
}

bool Tensor::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv1d: return "conv1d";
    case LayerKind::relu: return "relu";
    case LayerKind::reshape: return "reshape";
  }
  return "unknown";
}

std::size_t layer_parameter_count(const LayerSpec& spec) { return weight_count(spec) + bias_count(spec); }

Model Model::build(std::vector<LayerSpec> layers, int input_width) {
  if (input_width <= 0) shape_error("input width must be positive");
  Model m;
  m.layers = std::move(layers);
  m.input_width = input_width;
  m.shapes.push_back({1, input_width});
  bool has_conv = false;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const LayerSpec& s = m.layers[l];
    const ActivationShape in = m.shapes.back();
    ActivationShape out = in;
    std::ostringstream where;
    where << "layer " << l << " (" << to_string(s.kind) << "): ";
    switch (s.kind) {
      case LayerKind::dense:
        if (s.in <= 0 || s.out <= 0) shape_error(where.str() + "dense sizes must be positive");
        if (s.in != in.size())
          shape_error(where.str() + "expects " + std::to_string(s.in) + " inputs, got " +
                      std::to_string(in.size()));
        out = {1, s.out};
        break;
      case LayerKind::conv1d:
        if (s.kernel <= 0 || s.kernel % 2 == 0) shape_error(where.str() + "kernel must be odd");
        if (s.in_channels <= 0 || s.out_channels <= 0)
          shape_error(where.str() + "channel counts must be positive");
        if (s.in_channels != in.channels)
          shape_error(where.str() + "expects " + std::to_string(s.in_channels) +
                      " channels, got " + std::to_string(in.channels));
        out = {s.out_channels, in.length};
        has_conv = true;
        break;
      case LayerKind::relu: break;
      case LayerKind::reshape:
        if (s.channels <= 0 || s.length <= 0 || s.channels * s.length != in.size())
          shape_error(where.str() + "reshape must preserve the element count");
        out = {s.channels, s.length};
        break;
    }
    m.param_offset.push_back(offset);
    offset += layer_parameter_count(s);
    m.shapes.push_back(out);
  }
  if (!has_conv) shape_error("model needs at least one conv1d layer");
  m.params.assign(offset, 0.0);
  return m;
}

std::vector<LayerSpec> default_architecture(int spectrum_samples, int profile_points) {
  return {
      LayerSpec::dense(2 * spectrum_samples, 256),
      LayerSpec::relu(),
      LayerSpec::reshape(16, 16),
      LayerSpec::conv1d(16, 32, 5),
      LayerSpec::relu(),
      LayerSpec::conv1d(32, 32, 5),
      LayerSpec::relu(),
      LayerSpec::reshape(1, 32 * 16),
      LayerSpec::dense(32 * 16, profile_points),
  };
}

void initialize(Model& model, std::uint64_t seed) {
  Rng rng(seed);
  std::fill(model.params.begin(), model.params.end(), 0.0);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerSpec& s = model.layers[l];
    double fan_in = 0.0, fan_out = 0.0;
    if (s.kind == LayerKind::dense) {
      fan_in = s.in;
      fan_out = s.out;
    } else if (s.kind == LayerKind::conv1d) {
      fan_in = static_cast<double>(s.in_channels) * s.kernel;
      fan_out = static_cast<double>(s.out_channels) * s.kernel;
    } else {
      continue;
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    double* w = model.params.data() + model.param_offset[l];
    for (std::size_t i = 0; i < weight_count(s); ++i) w[i] = rng.uniform(-limit, limit);
  }
}

Tensor model_forward(const Model& model, const Tensor& input) {
  if (static_cast<int>(input.size()) != model.input_width)
    shape_error("input has " + std::to_string(input.size()) + " values, model expects " +
                std::to_string(model.input_width));
  Workspace ws;
  forward_pass(model, model.params.data(), input.values.data(), ws);
  const ActivationShape& out = model.shapes.back();
  if (out.channels == 1) return Tensor::vector(std::move(ws.acts.back()));
  return Tensor({out.channels, out.length}, std::move(ws.acts.back()));
}

double mse_loss(const Tensor& prediction, const Tensor& target) {
  if (prediction.shape != target.shape) shape_error("mse_loss operands differ in shape");
  if (prediction.size() == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double d = prediction.values[i] - target.values[i];
    acc += d * d;
  }
  return acc / static_cast<double>(prediction.size());
}

Gradients backward(const Model& model, const Tensor& input, const Tensor& target, double lambda) {
  if (static_cast<int>(input.size()) != model.input_width)
    shape_error("input does not match the model input width");
  if (static_cast<int>(target.size()) != model.output_width())
    shape_error("target does not match the model output width");
  Workspace ws;
  Gradients g;
  g.values.assign(model.params.size(), 0.0);
  const double mse =
      sample_gradient(model, model.params.data(), input.values.data(), target.values, ws, g.values);
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] += 2.0 * lambda * model.params[i];
  g.loss = mse + lambda * squared_norm(model.params);
  return g;
}

void adam_step(std::vector<double>& params, const std::vector<double>& gradients, AdamState& state,
               double learning_rate) {
  if (gradients.size() != params.size()) shape_error("gradient size differs from parameters");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = gradients[i];
    state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * g;
    state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (!(weight_decay_lambda >= 0.0))
    throw std::invalid_argument("TrainConfig: weight_decay_lambda must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
  if (early_stop_patience < 1) throw std::invalid_argument("TrainConfig: patience must be >= 1");
  if (workers < 1) throw std::invalid_argument("TrainConfig: workers must be >= 1");
}

std::vector<double> spectrum_features(const ReflectionSpectrum& spectrum) {
  const std::size_t m = spectrum.coefficients.size();
  std::vector<double> f(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    f[i] = spectrum.coefficients[i].real();
    f[m + i] = spectrum.coefficients[i].imag();
  }
  return f;
}

Standardization fit_standardization(const std::vector<Example>& data,
                                    const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw std::invalid_argument("fit_standardization: no samples");
  const std::size_t width = data[indices.front()].features.size();
  Standardization st{std::vector<double>(width, 0.0), std::vector<double>(width, 0.0)};
  for (std::size_t idx : indices)
    for (std::size_t i = 0; i < width; ++i) st.mean[i] += data[idx].features[i];
  const double n = static_cast<double>(indices.size());
  for (double& v : st.mean) v /= n;
  for (std::size_t idx : indices)
    for (std::size_t i = 0; i < width; ++i) {
      const double d = data[idx].features[i] - st.mean[i];
      st.scale[i] += d * d;
    }
  for (double& v : st.scale) {
    v = std::sqrt(v / n);
    if (!(v > 1e-12)) v = 1.0;
  }
  return st;
}

TrainResult train(const Model& initial, const std::vector<Example>& data,
                  const std::vector<std::size_t>& train_idx,
                  const std::vector<std::size_t>& validation_idx, const TrainConfig& config) {
  config.validate();
  if (data.empty() || train_idx.empty()) throw std::invalid_argument("train: empty training set");
  for (std::size_t i : train_idx)
    if (std::find(validation_idx.begin(), validation_idx.end(), i) != validation_idx.end())
      throw std::invalid_argument("train: training and validation indices overlap");
  for (const Example& e : data) {
    if (static_cast<int>(e.features.size()) != initial.input_width ||
        static_cast<int>(e.target.size()) != initial.output_width())
      shape_error("example dimensions do not match the model");
  }

  TrainResult result;
  result.model = initial;
  Model& model = result.model;
  model.standardization = fit_standardization(data, train_idx);
  std::vector<std::vector<double>> inputs(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    inputs[i] = standardize(*model.standardization, data[i].features);

  const std::size_t n_params = model.params.size();
  const double lambda = config.weight_decay_lambda;
  const int workers = config.workers;
  std::vector<double> params = model.params;
  std::vector<double> best = params;
  double best_val = std::numeric_limits<double>::infinity();
  AdamState adam;
  Rng rng(config.seed);
  std::vector<std::size_t> order = train_idx;

  const std::size_t max_batch = static_cast<std::size_t>(config.batch_size);
  std::vector<std::vector<double>> sample_grads(max_batch, std::vector<double>(n_params));
  std::vector<double> sample_loss(max_batch);
  std::vector<Workspace> spaces(static_cast<std::size_t>(workers));
  std::vector<double> grad(n_params);

  auto evaluate = [&](const std::vector<std::size_t>& idx) {
    Workspace ws;
    double acc = 0.0;
    for (std::size_t i : idx) {
      forward_pass(model, params.data(), inputs[i].data(), ws);
      const std::vector<double>& pred = ws.acts.back();
      double l = 0.0;
      for (std::size_t k = 0; k < pred.size(); ++k) {
        const double d = pred[k] - data[i].target[k];
        l += d * d;
      }
      acc += l / static_cast<double>(pred.size());
    }
    return acc / static_cast<double>(idx.size());
  };

  int epochs_since_best = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += max_batch) {
      const std::size_t count = std::min(max_batch, order.size() - start);
      auto run = [&](int worker) {
        for (std::size_t b = static_cast<std::size_t>(worker); b < count;
             b += static_cast<std::size_t>(workers)) {
          const std::size_t idx = order[start + b];
          sample_loss[b] = sample_gradient(model, params.data(), inputs[idx].data(),
                                           data[idx].target, spaces[static_cast<std::size_t>(worker)],
                                           sample_grads[b]);
        }
      };
      if (workers == 1) {
        run(0);
      } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
      }
      // Fixed-order reduction keeps results independent of the worker count.
      const double inv = 1.0 / static_cast<double>(count);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = 0; b < count; ++b) {
        const std::vector<double>& g = sample_grads[b];
        for (std::size_t i = 0; i < n_params; ++i) grad[i] += g[i];
        epoch_loss += sample_loss[b];
      }
      for (std::size_t i = 0; i < n_params; ++i) grad[i] = grad[i] * inv + 2.0 * lambda * params[i];
      adam_step(params, grad, adam, config.learning_rate);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = epoch_loss / static_cast<double>(order.size());
    rec.validation_mse = validation_idx.empty() ? rec.train_mse : evaluate(validation_idx);
    if (!std::isfinite(rec.train_mse) || !std::isfinite(rec.validation_mse)) {
      std::ostringstream msg;
      msg << "non-finite loss at epoch " << epoch;
      throw Error(ErrorCode::divergence, msg.str());
    }
    result.history.push_back(rec);
    if (rec.validation_mse < best_val) {
      best_val = rec.validation_mse;
      best = params;
      result.best_epoch = epoch;
      epochs_since_best = 0;
    } else if (++epochs_since_best >= config.early_stop_patience) {
      break;
    }
  }
  model.params = std::move(best);
  result.best_validation_mse = best_val;
  return result;
}

DepthProfile predict(const Model& model, const ReflectionSpectrum& spectrum, const SpatialGrid& grid,
                     const PlateSpec& plate) {
  if (!model.standardization)
    throw Error(ErrorCode::unstandardized_model, "model carries no input statistics");
  if (static_cast<int>(2 * spectrum.coefficients.size()) != model.input_width)
    shape_error("spectrum length does not match the model input");
  if (model.output_width() != grid.size) shape_error("model output does not match the grid");
  const std::vector<double> x = standardize(*model.standardization, spectrum_features(spectrum));
  Workspace ws;
  forward_pass(model, model.params.data(), x.data(), ws);
  const double cap = 0.8 * plate.depth();
  DepthProfile out{grid, std::move(ws.acts.back())};
  for (double& d : out.depths) d = std::clamp(d, 0.0, cap);
  return out;
}

}  // namespace shwave::netinv
