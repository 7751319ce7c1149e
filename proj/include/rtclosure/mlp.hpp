#pragma once

// Fully connected tanh network with identity output, reverse-mode
// gradients and Adam. All arithmetic is in double precision. Samples are
// stored column-wise: a batch is a (features x batch) matrix.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rtclosure/errors.hpp"

namespace rtclosure {

inline constexpr int kModelFormatVersion = 1;
/// Features with a standard deviation below this are treated as constant.
inline constexpr double kStdFloor = 1e-12;

struct MlpModel {
  std::vector<int> layer_sizes;
  std::vector<Eigen::MatrixXd> weights;  // layer l: sizes[l+1] x sizes[l]
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_std;
  /// Free-form provenance: ansatz tag, N, training seed, optimizer, ...
  nlohmann::json metadata = nlohmann::json::object();

  int input_width() const { return layer_sizes.front(); }
  int output_width() const { return layer_sizes.back(); }
  std::size_t n_layers() const { return weights.size(); }

  std::size_t n_parameters() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
    }
    return n;
  }

  void validate() const {
    if (layer_sizes.size() < 2) throw std::invalid_argument("MlpModel: need at least two layer sizes");
    if (weights.size() + 1 != layer_sizes.size() || biases.size() != weights.size()) {
      throw std::invalid_argument("MlpModel: layer count mismatch");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (weights[l].rows() != layer_sizes[l + 1] || weights[l].cols() != layer_sizes[l] ||
          biases[l].size() != layer_sizes[l + 1]) {
        throw std::invalid_argument("MlpModel: shape mismatch in layer " + std::to_string(l));
      }
    }
    if (input_mean.size() != layer_sizes.front() || input_std.size() != layer_sizes.front()) {
      throw std::invalid_argument("MlpModel: normalization width mismatch");
    }
    for (Eigen::Index i = 0; i < input_std.size(); ++i) {
      if (!(input_std[i] > 0.0)) throw std::invalid_argument("MlpModel: input std must be > 0");
    }
  }
};

/// Glorot-uniform weights, zero biases, identity normalization.
inline MlpModel make_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw std::invalid_argument("make_mlp: need at least two layer sizes");
  for (int s : layer_sizes) {
    if (s < 1) throw std::invalid_argument("make_mlp: layer widths must be positive");
  }
  MlpModel m;
  m.layer_sizes = layer_sizes;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Eigen::MatrixXd w(fan_out, fan_in);
    // Row-major fill so the draw order matches the serialized layout.
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) w(r, c) = dist(rng);
    }
    m.weights.push_back(std::move(w));
    m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  m.input_mean = Eigen::VectorXd::Zero(layer_sizes.front());
  m.input_std = Eigen::VectorXd::Ones(layer_sizes.front());
  return m;
}

// ---------------------------------------------------------------------------
// Input standardization

struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
};

/// Per-feature mean and (population) standard deviation of the columns of
/// `samples` (features x n). Constant features get std = 1.
inline Standardization fit_standardization(const Eigen::MatrixXd& samples) {
  if (samples.cols() == 0) throw std::invalid_argument("fit_standardization: no samples");
  Standardization s;
  s.mean = samples.rowwise().mean();
  s.std.resize(samples.rows());
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const double var = (samples.row(i).array() - s.mean[i]).square().mean();
    const double sd = std::sqrt(var);
    s.std[i] = sd > kStdFloor ? sd : 1.0;
  }
  return s;
}

inline Eigen::MatrixXd standardize(const Eigen::MatrixXd& raw, const Eigen::VectorXd& mean,
                                   const Eigen::VectorXd& std) {
  return (raw.colwise() - mean).array().colwise() / std.array();
}

// ---------------------------------------------------------------------------
// Forward / backward

/// Activations of every layer for one batch; activations[0] is the
/// standardized input, the last entry the network output.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;
};

inline Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& x,
                                     ForwardCache* cache = nullptr) {
  if (x.rows() != model.input_width()) {
    throw std::invalid_argument("forward: input width " + std::to_string(x.rows()) +
                                " != model input width " + std::to_string(model.input_width()));
  }
  Eigen::MatrixXd a = standardize(x, model.input_mean, model.input_std);
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(a);
  }
  const std::size_t n = model.n_layers();
  for (std::size_t l = 0; l < n; ++l) {
    Eigen::MatrixXd z = model.weights[l] * a;
    z.colwise() += model.biases[l];
    if (l + 1 < n) z = z.array().tanh();
    a = std::move(z);
    if (cache) cache->activations.push_back(a);
  }
  return a;
}

inline Eigen::VectorXd forward(const MlpModel& model, std::span<const double> x) {
  const Eigen::Map<const Eigen::VectorXd> in(x.data(), static_cast<Eigen::Index>(x.size()));
  return forward_batch(model, Eigen::MatrixXd(in));
}

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  /// d/d(raw input), features x batch.
  Eigen::MatrixXd inputs;
};

/// Reverse-mode gradients of <upstream, output> summed over the batch.
inline Gradients backward(const MlpModel& model, const ForwardCache& cache,
                          const Eigen::MatrixXd& upstream) {
  const std::size_t n = model.n_layers();
  if (cache.activations.size() != n + 1) {
    throw std::invalid_argument("backward: forward cache does not match the model");
  }
  if (upstream.rows() != model.output_width() ||
      upstream.cols() != cache.activations.back().cols()) {
    throw std::invalid_argument("backward: upstream gradient shape mismatch");
  }
  Gradients g;
  g.weights.resize(n);
  g.biases.resize(n);
  Eigen::MatrixXd delta = upstream;
  for (std::size_t l = n; l-- > 0;) {
    const Eigen::MatrixXd& a_in = cache.activations[l];
    g.weights[l].noalias() = delta * a_in.transpose();
    g.biases[l] = delta.rowwise().sum();
    Eigen::MatrixXd back = model.weights[l].transpose() * delta;
    if (l > 0) {
      back.array() *= 1.0 - a_in.array().square();
    }
    delta = std::move(back);
  }
  g.inputs = delta.array().colwise() / model.input_std.array();
  return g;
}

inline Gradients backward(const MlpModel& model, std::span<const double> x,
                          std::span<const double> upstream) {
  const Eigen::Map<const Eigen::VectorXd> in(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::Map<const Eigen::VectorXd> up(upstream.data(),
                                             static_cast<Eigen::Index>(upstream.size()));
  ForwardCache cache;
  forward_batch(model, Eigen::MatrixXd(in), &cache);
  return backward(model, cache, Eigen::MatrixXd(up));
}

// ---------------------------------------------------------------------------
// Adam

struct AdamState {
  std::vector<Eigen::MatrixXd> m_weights, v_weights;
  std::vector<Eigen::VectorXd> m_biases, v_biases;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Coupled L2 coefficient: lambda * w is added to the gradient.
  double weight_decay = 1e-7;

  static AdamState for_model(const MlpModel& model, double weight_decay = 1e-7) {
    AdamState s;
    s.weight_decay = weight_decay;
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
      s.m_weights.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
      s.v_weights.push_back(s.m_weights.back());
      s.m_biases.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
      s.v_biases.push_back(s.m_biases.back());
    }
    return s;
  }
};

namespace detail {

template <class Param>
void adam_update(Param& p, const Param& grad, Param& m, Param& v, const AdamState& s,
                 double lr, double bc1, double bc2) {
  const Param g = grad + s.weight_decay * p;
  m = s.beta1 * m + (1.0 - s.beta1) * g;
  v = s.beta2 * v + (1.0 - s.beta2) * g.cwiseProduct(g);
  p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + s.epsilon);
}

}  // namespace detail

inline void adam_step(MlpModel& model, const Gradients& grads, AdamState& state, double lr) {
  if (grads.weights.size() != model.n_layers() || state.m_weights.size() != model.n_layers()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    detail::adam_update(model.weights[l], grads.weights[l], state.m_weights[l],
                        state.v_weights[l], state, lr, bc1, bc2);
    detail::adam_update(model.biases[l], grads.biases[l], state.m_biases[l], state.v_biases[l],
                        state, lr, bc1, bc2);
  }
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const MlpModel& model) {
  nlohmann::json j;
  j["version"] = kModelFormatVersion;
  j["layer_sizes"] = model.layer_sizes;
  j["activation"] = "tanh";
  auto& w = j["weights"] = nlohmann::json::array();
  auto& b = j["biases"] = nlohmann::json::array();
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(model.weights[l].size()));
    for (Eigen::Index r = 0; r < model.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < model.weights[l].cols(); ++c) flat.push_back(model.weights[l](r, c));
    }
    w.push_back(flat);
    b.push_back(std::vector<double>(model.biases[l].data(),
                                    model.biases[l].data() + model.biases[l].size()));
  }
  j["input_mean"] = std::vector<double>(model.input_mean.data(),
                                        model.input_mean.data() + model.input_mean.size());
  j["input_std"] = std::vector<double>(model.input_std.data(),
                                       model.input_std.data() + model.input_std.size());
  j["metadata"] = model.metadata;
  return j;
}

inline MlpModel model_from_json(const nlohmann::json& j) {
  if (!j.contains("version")) throw std::invalid_argument("model file: missing version field");
  if (j.at("version").get<int>() != kModelFormatVersion) {
    throw std::invalid_argument("model file: unsupported version");
  }
  MlpModel m;
  m.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  const auto& w = j.at("weights");
  const auto& b = j.at("biases");
  if (w.size() + 1 != m.layer_sizes.size() || b.size() + 1 != m.layer_sizes.size()) {
    throw std::invalid_argument("model file: layer count mismatch");
  }
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    const auto flat = w[l].get<std::vector<double>>();
    const int rows = m.layer_sizes[l + 1];
    const int cols = m.layer_sizes[l];
    if (flat.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
      throw std::invalid_argument("model file: weight array size mismatch");
    }
    Eigen::MatrixXd mat(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) mat(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    }
    m.weights.push_back(std::move(mat));
    const auto bias = b[l].get<std::vector<double>>();
    m.biases.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(),
                                                         static_cast<Eigen::Index>(bias.size())));
  }
  const auto mean = j.at("input_mean").get<std::vector<double>>();
  const auto sd = j.at("input_std").get<std::vector<double>>();
  m.input_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  m.input_std = Eigen::Map<const Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  if (j.contains("metadata")) m.metadata = j.at("metadata");
  m.validate();
  return m;
}

inline void save_model(const MlpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << to_json(model).dump(1) << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed model file '" + path + "': " + e.what());
  }
}

}  // namespace rtclosure
