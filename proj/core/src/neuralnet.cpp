#include "affectfuse/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "affectfuse/error.hpp"
#include "binary_io.hpp"
#include "json_codec.hpp"

namespace affectfuse::nn {
namespace {

using json = nlohmann::json;

constexpr int kMinUnits = 32;
constexpr std::string_view kModelMagic = "MLP1";

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void check_input(const MLPModel& model, MatrixView x, std::span<const double> y) {
  if (static_cast<int>(x.cols) != model.input_dim()) {
    throw DimMismatch("model expects " + std::to_string(model.input_dim()) + " inputs, got " +
                      std::to_string(x.cols));
  }
  if (y.size() != x.rows) throw DimMismatch("feature rows and targets differ in count");
}

// Output-unit error signal dL/dz for one example (before batch averaging).
double output_delta(LossKind kind, double p, double y) {
  if (kind == LossKind::BinaryNLL) return p - y;
  const double diff = p - y;
  const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
  return sign * p * (1.0 - p);
}

// Forward pass keeping every layer's activations; activations[0] is the input.
// Hidden activations are post-ReLU, so a value > 0 marks an active unit.
double forward_cached(const MLPModel& model, std::span<const double> x,
                      std::vector<std::vector<double>>& activations) {
  const auto& layers = model.layers();
  const auto params = model.parameters();
  activations.resize(layers.size() + 1);
  activations[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& shape = layers[l];
    const auto& in = activations[l];
    auto& out = activations[l + 1];
    out.resize(static_cast<std::size_t>(shape.out));
    const double* w = params.data() + shape.weight_offset;
    const double* b = params.data() + shape.bias_offset;
    const bool is_output = l + 1 == layers.size();
    for (int o = 0; o < shape.out; ++o) {
      const double* w_row = w + static_cast<std::size_t>(o) * static_cast<std::size_t>(shape.in);
      double z = b[o];
      for (int i = 0; i < shape.in; ++i) z += w_row[i] * in[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(o)] = is_output ? sigmoid(z) : (z > 0.0 || std::isnan(z) ? z : 0.0);
    }
  }
  return activations.back().front();
}

}  // namespace

std::string_view to_string(LossKind kind) { return kind == LossKind::MAE ? "mae" : "nll"; }

LossKind loss_kind_from_string(std::string_view name) {
  if (name == "mae") return LossKind::MAE;
  if (name == "nll") return LossKind::BinaryNLL;
  throw RangeError("unknown loss kind '" + std::string(name) + "'");
}

void MLPConfig::validate() const {
  if (n_hidden < 0 || n_hidden > 3) throw RangeError("n_hidden must lie in [0, 3]");
  if (first_units < 64 || first_units > 512) throw RangeError("first_units must lie in [64, 512]");
  if (!(learning_rate >= 1e-6 && learning_rate <= 10.0)) {
    throw RangeError("learning_rate must lie in [1e-6, 10]");
  }
  if (max_epochs < 1) throw RangeError("max_epochs must be at least 1");
  if (batch_size < 1) throw RangeError("batch_size must be at least 1");
  if (patience < 1) throw RangeError("patience must be at least 1");
}

std::vector<int> layer_sizes(int n_hidden, int first_units) {
  if (n_hidden < 0 || n_hidden > 3) throw RangeError("n_hidden must lie in [0, 3]");
  if (first_units < 64 || first_units > 512) throw RangeError("first_units must lie in [64, 512]");
  std::vector<int> widths;
  int width = first_units;
  for (int i = 0; i < n_hidden; ++i) {
    widths.push_back(width);
    width = std::max(kMinUnits, width / 2);
  }
  return widths;
}

MLPModel::MLPModel(const MLPConfig& config, int input_dim) : config_(config) {
  if (input_dim < 1) throw DimMismatch("input dimension must be positive");
  std::vector<int> dims{input_dim};
  for (int w : layer_sizes(config.n_hidden, config.first_units)) dims.push_back(w);
  dims.push_back(1);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    LayerShape shape;
    shape.in = dims[l];
    shape.out = dims[l + 1];
    shape.weight_offset = offset;
    offset += static_cast<std::size_t>(shape.in) * static_cast<std::size_t>(shape.out);
    shape.bias_offset = offset;
    offset += static_cast<std::size_t>(shape.out);
    layers_.push_back(shape);
  }
  params_.assign(offset, 0.0);
}

MLPModel MLPModel::initialized(const MLPConfig& config, int input_dim) {
  MLPModel model(config, input_dim);
  Rng rng(derive_seed(config.seed, {"init"}));
  for (std::size_t l = 0; l < model.layers_.size(); ++l) {
    const auto& shape = model.layers_[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(shape.in + shape.out));
    for (double& w : model.weights(l)) w = rng.uniform(-limit, limit);
  }
  return model;
}

std::vector<int> MLPModel::layer_dims() const {
  std::vector<int> dims{layers_.front().in};
  for (const auto& shape : layers_) dims.push_back(shape.out);
  return dims;
}

std::span<double> MLPModel::weights(std::size_t layer) {
  const auto& s = layers_.at(layer);
  return std::span<double>(params_).subspan(s.weight_offset, static_cast<std::size_t>(s.in) * s.out);
}

std::span<double> MLPModel::biases(std::size_t layer) {
  const auto& s = layers_.at(layer);
  return std::span<double>(params_).subspan(s.bias_offset, static_cast<std::size_t>(s.out));
}

double MLPModel::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim()) {
    throw DimMismatch("model expects " + std::to_string(input_dim()) + " inputs, got " +
                      std::to_string(x.size()));
  }
  std::vector<std::vector<double>> activations;
  return forward_cached(*this, x, activations);
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double loss(LossKind kind, double p, double y) {
  if (kind == LossKind::MAE) return std::abs(p - y);
  // NaN passes through std::clamp unchanged; divergence detection relies on it.
  const double q = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

double batch_loss(const MLPModel& model, MatrixView x, std::span<const double> y, LossKind kind) {
  check_input(model, x, y);
  if (x.rows == 0) return 0.0;
  std::vector<std::vector<double>> activations;
  double total = 0.0;
  for (std::size_t r = 0; r < x.rows; ++r) {
    total += loss(kind, forward_cached(model, x.row(r), activations), y[r]);
  }
  return total / static_cast<double>(x.rows);
}

Gradients backward(const MLPModel& model, MatrixView x, std::span<const double> y, LossKind kind) {
  check_input(model, x, y);
  Gradients grads;
  grads.values.assign(model.parameters().size(), 0.0);
  if (x.rows == 0) return grads;

  const auto& layers = model.layers();
  const auto params = model.parameters();
  const double inv_batch = 1.0 / static_cast<double>(x.rows);
  std::vector<std::vector<double>> activations;
  std::vector<double> delta;
  std::vector<double> delta_prev;
  double total_loss = 0.0;

  for (std::size_t r = 0; r < x.rows; ++r) {
    const double p = forward_cached(model, x.row(r), activations);
    total_loss += loss(kind, p, y[r]);
    delta.assign(1, output_delta(kind, p, y[r]) * inv_batch);

    for (std::size_t l = layers.size(); l-- > 0;) {
      const auto& shape = layers[l];
      const auto& in = activations[l];
      double* gw = grads.values.data() + shape.weight_offset;
      double* gb = grads.values.data() + shape.bias_offset;
      const double* w = params.data() + shape.weight_offset;
      for (int o = 0; o < shape.out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        gb[o] += d;
        if (d == 0.0) continue;
        double* gw_row = gw + static_cast<std::size_t>(o) * static_cast<std::size_t>(shape.in);
        for (int i = 0; i < shape.in; ++i) gw_row[i] += d * in[static_cast<std::size_t>(i)];
      }
      if (l == 0) break;
      // Propagate through W^T and the ReLU of the previous layer.
      delta_prev.assign(static_cast<std::size_t>(shape.in), 0.0);
      for (int o = 0; o < shape.out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        if (d == 0.0) continue;
        const double* w_row = w + static_cast<std::size_t>(o) * static_cast<std::size_t>(shape.in);
        for (int i = 0; i < shape.in; ++i) delta_prev[static_cast<std::size_t>(i)] += w_row[i] * d;
      }
      for (int i = 0; i < shape.in; ++i) {
        if (!(in[static_cast<std::size_t>(i)] > 0.0)) delta_prev[static_cast<std::size_t>(i)] = 0.0;
      }
      delta.swap(delta_prev);
    }
  }
  grads.loss = total_loss * inv_batch;
  return grads;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double learning_rate) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw DimMismatch("Adam parameter, gradient and state sizes differ");
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(AdamState::kBeta1, t);
  const double correction2 = 1.0 - std::pow(AdamState::kBeta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = AdamState::kBeta1 * state.m[i] + (1.0 - AdamState::kBeta1) * g;
    state.v[i] = AdamState::kBeta2 * state.v[i] + (1.0 - AdamState::kBeta2) * g * g;
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + AdamState::kEpsilon);
  }
}

MLPModel train(const MLPConfig& config, MatrixView x_train, std::span<const double> y_train,
               MatrixView x_dev, std::span<const double> y_dev) {
  config.validate();
  if (x_train.rows == 0 || x_dev.rows == 0) throw DimMismatch("train and dev sets must be non-empty");
  if (x_train.cols != x_dev.cols) throw DimMismatch("train and dev feature widths differ");
  if (y_train.size() != x_train.rows || y_dev.size() != x_dev.rows) {
    throw DimMismatch("feature rows and targets differ in count");
  }

  MLPModel model = MLPModel::initialized(config, static_cast<int>(x_train.cols));
  AdamState state(model.parameters().size());
  Rng shuffle_rng(derive_seed(config.seed, {"shuffle"}));

  std::vector<std::size_t> order(x_train.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(config.batch_size);
  std::vector<double> batch_x;
  std::vector<double> batch_y;

  std::vector<double> best_params(model.parameters().begin(), model.parameters().end());
  double best_dev = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::vector<EpochStats> history;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      batch_x.clear();
      batch_y.clear();
      for (std::size_t k = start; k < end; ++k) {
        const auto row = x_train.row(order[k]);
        batch_x.insert(batch_x.end(), row.begin(), row.end());
        batch_y.push_back(y_train[order[k]]);
      }
      const MatrixView view{batch_x, end - start, x_train.cols};
      const auto grads = backward(model, view, batch_y, config.loss);
      if (!std::isfinite(grads.loss) || !all_finite(grads.values)) throw NonFiniteLoss(epoch);
      adam_step(model.parameters(), grads.values, state, config.learning_rate);
      loss_sum += grads.loss * static_cast<double>(end - start);
    }
    if (!all_finite(model.parameters())) throw NonFiniteLoss(epoch);
    const double dev_loss = batch_loss(model, x_dev, y_dev, config.loss);
    if (!std::isfinite(dev_loss)) throw NonFiniteLoss(epoch);
    history.push_back({epoch, loss_sum / static_cast<double>(order.size()), dev_loss});

    if (dev_loss < best_dev) {
      best_dev = dev_loss;
      since_best = 0;
      std::copy(model.parameters().begin(), model.parameters().end(), best_params.begin());
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  std::copy(best_params.begin(), best_params.end(), model.parameters().begin());
  model.set_history(std::move(history));
  return model;
}

std::vector<double> predict_proba(const MLPModel& model, MatrixView x) {
  if (static_cast<int>(x.cols) != model.input_dim()) {
    throw DimMismatch("model expects " + std::to_string(model.input_dim()) + " inputs, got " +
                      std::to_string(x.cols));
  }
  std::vector<double> out;
  out.reserve(x.rows);
  std::vector<std::vector<double>> activations;
  for (std::size_t r = 0; r < x.rows; ++r) out.push_back(forward_cached(model, x.row(r), activations));
  return out;
}

void save_model(std::ostream& out, const MLPModel& model) {
  json header;
  header["config"] = detail::config_to_json(model.config());
  header["layer_dims"] = model.layer_dims();
  json history = json::array();
  for (const auto& h : model.history()) history.push_back({h.epoch, h.train_loss, h.dev_loss});
  header["history"] = std::move(history);
  const std::string blob = header.dump();

  out.write(kModelMagic.data(), static_cast<std::streamsize>(kModelMagic.size()));
  detail::put_uint(out, static_cast<std::uint32_t>(blob.size()));
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  for (double v : model.parameters()) detail::put_f64(out, v);
  if (!out) throw FormatError("failed to write MLP1 stream");
}

void save_model(const std::filesystem::path& path, const MLPModel& model) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  save_model(out, model);
}

MLPModel load_model(std::istream& in) {
  detail::expect_magic(in, kModelMagic);
  const auto length = detail::get_uint<std::uint32_t>(in, "header length");
  std::string blob(length, '\0');
  detail::read_exact(in, blob.data(), length, "header");
  json header;
  try {
    header = json::parse(blob);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed MLP1 header: ") + e.what());
  }
  const MLPConfig config = detail::config_from_json(header.at("config"));
  const auto dims = header.at("layer_dims").get<std::vector<int>>();
  MLPModel model(config, dims.at(0));
  if (model.layer_dims() != dims) throw FormatError("layer dims do not match the stored config");
  for (double& v : model.parameters()) v = detail::get_f64(in, "parameters");
  detail::expect_eof(in);
  std::vector<EpochStats> history;
  for (const auto& h : header.at("history")) {
    history.push_back({h.at(0).get<int>(), h.at(1).get<double>(), h.at(2).get<double>()});
  }
  model.set_history(std::move(history));
  return model;
}

MLPModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return load_model(in);
}

}  // namespace affectfuse::nn
