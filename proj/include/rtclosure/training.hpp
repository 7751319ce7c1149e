#pragma once

// Supervised datasets extracted from kinetic trajectories, the loss and
// error metrics, and the mini-batch Adam training loop shared by the four
// learned ansaetze.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rtclosure/closures.hpp"
#include "rtclosure/errors.hpp"
#include "rtclosure/kinetic.hpp"
#include "rtclosure/mlp.hpp"

namespace rtclosure {

/// Rows are stored column-wise to match the network batch layout.
struct Dataset {
  ClosureTag ansatz = ClosureTag::lg;
  int order = 5;
  Eigen::MatrixXd inputs;  // network features x rows
  /// Multipliers of the network outputs: m_0..m_N (LWM) or d_x m_0..d_x m_N
  /// (LG, LGNM). Empty for LM.
  Eigen::MatrixXd multipliers;
  Eigen::VectorXd targets;
  std::vector<int> trajectory;  // source trajectory of each row
  std::vector<double> times;    // snapshot time of each row
  nlohmann::json provenance = nlohmann::json::object();
  std::size_t dropped = 0;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(targets.size()); }

  void validate() const {
    const auto n = static_cast<Eigen::Index>(rows());
    if (inputs.cols() != n || trajectory.size() != rows() || times.size() != rows() ||
        (ansatz != ClosureTag::lm && multipliers.cols() != n)) {
      throw std::invalid_argument("Dataset: row counts differ across arrays");
    }
    if (inputs.rows() != ansatz_input_width(ansatz, order)) {
      throw std::invalid_argument("Dataset: feature width does not match the ansatz");
    }
  }
};

/// One row per (grid point, snapshot). Targets are m_{N+1} for LM/LWM and
/// d_x m_{N+1} for LG/LGNM. Rows with non-finite entries (and, for LGNM,
/// rows with |m_0| < 1e-12) are dropped and counted.
inline Dataset build_dataset(std::span<const MomentTrajectory> trajectories, ClosureTag ansatz,
                             int order) {
  if (!is_learned(ansatz)) throw std::invalid_argument("build_dataset: ansatz must be learned");
  if (order < 1) throw std::invalid_argument("build_dataset: N must be >= 1");
  std::size_t capacity = 0;
  for (const auto& t : trajectories) {
    if (t.order < order + 1) {
      throw std::invalid_argument("build_dataset: trajectory records moments up to " +
                                  std::to_string(t.order) + " but N+1 = " +
                                  std::to_string(order + 1) + " is required");
    }
    capacity += t.n_snapshots() * static_cast<std::size_t>(t.nx);
  }
  const int n_in = ansatz_input_width(ansatz, order);
  const int width = order + 1;
  const bool needs_multipliers = ansatz != ClosureTag::lm;
  std::vector<double> in_buf, mul_buf, tgt_buf;
  in_buf.reserve(capacity * static_cast<std::size_t>(n_in));
  if (needs_multipliers) mul_buf.reserve(capacity * static_cast<std::size_t>(width));
  tgt_buf.reserve(capacity);

  Dataset ds;
  ds.ansatz = ansatz;
  ds.order = order;
  nlohmann::json sources = nlohmann::json::array();
  std::vector<double> m(static_cast<std::size_t>(width)), dm(static_cast<std::size_t>(width));
  for (std::size_t ti = 0; ti < trajectories.size(); ++ti) {
    const auto& traj = trajectories[ti];
    sources.push_back({{"seed", traj.seed},
                       {"sigma_s", traj.sigma_s.empty() ? 0.0 : traj.sigma_s.front()},
                       {"sigma_a", traj.sigma_a.empty() ? 0.0 : traj.sigma_a.front()},
                       {"snapshots", traj.n_snapshots()}});
    for (std::size_t s = 0; s < traj.n_snapshots(); ++s) {
      for (int j = 0; j < traj.nx; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        for (int k = 0; k < width; ++k) {
          m[static_cast<std::size_t>(k)] = traj.moment(s, k)[ju];
          dm[static_cast<std::size_t>(k)] = traj.derivative(s, k)[ju];
        }
        const double target = (ansatz == ClosureTag::lm || ansatz == ClosureTag::lwm)
                                  ? traj.moment(s, order + 1)[ju]
                                  : traj.derivative(s, order + 1)[ju];
        bool ok = std::isfinite(target);
        for (int k = 0; k < width && ok; ++k) {
          ok = std::isfinite(m[static_cast<std::size_t>(k)]) &&
               std::isfinite(dm[static_cast<std::size_t>(k)]);
        }
        if (ok && ansatz == ClosureTag::lgnm && !(std::abs(m[0]) >= kDensityFloor)) ok = false;
        if (!ok) {
          ++ds.dropped;
          continue;
        }
        if (ansatz == ClosureTag::lgnm) {
          for (int k = 1; k < width; ++k) in_buf.push_back(m[static_cast<std::size_t>(k)] / m[0]);
        } else {
          in_buf.insert(in_buf.end(), m.begin(), m.end());
        }
        if (ansatz == ClosureTag::lwm) mul_buf.insert(mul_buf.end(), m.begin(), m.end());
        if (ansatz == ClosureTag::lg || ansatz == ClosureTag::lgnm) {
          mul_buf.insert(mul_buf.end(), dm.begin(), dm.end());
        }
        tgt_buf.push_back(target);
        ds.trajectory.push_back(static_cast<int>(ti));
        ds.times.push_back(traj.times[s]);
      }
    }
  }
  const auto rows = static_cast<Eigen::Index>(tgt_buf.size());
  ds.inputs = Eigen::Map<const Eigen::MatrixXd>(in_buf.data(), n_in, rows);
  if (needs_multipliers) ds.multipliers = Eigen::Map<const Eigen::MatrixXd>(mul_buf.data(), width, rows);
  ds.targets = Eigen::Map<const Eigen::VectorXd>(tgt_buf.data(), rows);
  ds.provenance = {{"ansatz", to_string(ansatz)}, {"N", order}, {"sources", sources},
                   {"dropped_rows", ds.dropped}};
  return ds;
}

// ---------------------------------------------------------------------------
// Metrics

inline double mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw std::invalid_argument("mse_loss: length mismatch");
  if (pred.empty()) throw std::invalid_argument("mse_loss: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

/// ||appx - truth||_2 / ||truth||_2 over all samples.
inline double relative_l2(std::span<const double> appx, std::span<const double> truth) {
  if (appx.size() != truth.size()) throw std::invalid_argument("relative_l2: length mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < appx.size(); ++i) {
    const double d = appx[i] - truth[i];
    num += d * d;
    den += truth[i] * truth[i];
  }
  if (!(den > 0.0)) throw UndefinedMetric("relative_l2: reference has zero norm");
  return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// Prediction through an ansatz

/// Ansatz output for a block of rows: the network output itself (LM) or its
/// contraction with the multipliers (LWM, LG, LGNM).
inline Eigen::VectorXd ansatz_output(ClosureTag ansatz, const Eigen::MatrixXd& net_out,
                                     const Eigen::MatrixXd& multipliers) {
  if (ansatz == ClosureTag::lm) return net_out.row(0).transpose();
  return net_out.cwiseProduct(multipliers).colwise().sum().transpose();
}

/// Predictions of `model` for the rows in `rows` (all rows if empty).
inline Eigen::VectorXd predict(const MlpModel& model, const Dataset& ds,
                               std::span<const std::size_t> rows = {}) {
  const std::size_t n = rows.empty() ? ds.rows() : rows.size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  constexpr std::size_t kChunk = 4096;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t len = std::min(kChunk, n - start);
    Eigen::MatrixXd x(ds.inputs.rows(), static_cast<Eigen::Index>(len));
    Eigen::MatrixXd mul(ds.multipliers.rows(), static_cast<Eigen::Index>(len));
    for (std::size_t i = 0; i < len; ++i) {
      const auto r = static_cast<Eigen::Index>(rows.empty() ? start + i : rows[start + i]);
      x.col(static_cast<Eigen::Index>(i)) = ds.inputs.col(r);
      if (mul.rows() > 0) mul.col(static_cast<Eigen::Index>(i)) = ds.multipliers.col(r);
    }
    out.segment(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)) =
        ansatz_output(ds.ansatz, forward_batch(model, x), mul);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training loop

struct TrainConfig {
  int epochs = 1000;
  int batch = 1024;
  double lr0 = 1e-3;
  double decay = 0.35;
  int decay_every = 100;
  double l2 = 1e-7;
  std::uint64_t seed = 0;
  std::vector<int> hidden = {256, 256, 256, 256, 256};
  /// Fraction of whole trajectories held out for validation.
  double validation_fraction = 0.1;

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (batch < 1) throw std::invalid_argument("TrainConfig: batch must be >= 1");
    if (decay_every < 1) throw std::invalid_argument("TrainConfig: decay_every must be >= 1");
    if (hidden.empty()) throw std::invalid_argument("TrainConfig: need at least one hidden layer");
  }
};

/// lr(e) = lr0 * decay^floor(e / decay_every), epochs counted from 0.
inline double learning_rate(const TrainConfig& cfg, int epoch) {
  return cfg.lr0 * std::pow(cfg.decay, static_cast<double>(epoch / cfg.decay_every));
}

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double mse = 0.0;
  double relative_l2 = 0.0;             // training rows
  double validation_relative_l2 = NAN;  // NaN when there is no validation split
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochLog> history;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> validation_rows;
};

/// Train/validation split by whole trajectories.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_by_trajectory(
    const Dataset& ds, double validation_fraction, std::uint64_t seed) {
  std::vector<int> ids(ds.trajectory.begin(), ds.trajectory.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::mt19937_64 rng(seed ^ 0x5eed5eedULL);
  std::shuffle(ids.begin(), ids.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::floor(validation_fraction * static_cast<double>(ids.size())));
  std::vector<char> is_val(ids.empty() ? 0 : static_cast<std::size_t>(*std::max_element(ids.begin(), ids.end())) + 1, 0);
  for (std::size_t i = 0; i < n_val; ++i) is_val[static_cast<std::size_t>(ids[i])] = 1;
  std::vector<std::size_t> train, val;
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    (is_val[static_cast<std::size_t>(ds.trajectory[r])] ? val : train).push_back(r);
  }
  return {train, val};
}

/// Row order used for epoch `epoch`; a pure permutation of `rows`.
inline std::vector<std::size_t> shuffled_rows(std::vector<std::size_t> rows, std::uint64_t seed,
                                              int epoch) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(epoch));
  std::shuffle(rows.begin(), rows.end(), rng);
  return rows;
}

inline double relative_l2_on(const MlpModel& model, const Dataset& ds,
                             std::span<const std::size_t> rows) {
  const Eigen::VectorXd pred = predict(model, ds, rows);
  Eigen::VectorXd truth(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    truth[static_cast<Eigen::Index>(i)] = ds.targets[static_cast<Eigen::Index>(rows[i])];
  }
  return relative_l2(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())),
                     std::span<const double>(truth.data(), static_cast<std::size_t>(truth.size())));
}

/// Mini-batch Adam on the MSE of the ansatz output. Records the training
/// (and validation) relative L2 error after every epoch.
template <class Callback>
TrainResult train(const Dataset& ds, const TrainConfig& cfg, Callback&& on_epoch) {
  cfg.validate();
  ds.validate();
  if (ds.rows() == 0) throw std::invalid_argument("train: empty dataset");
  const int order = ds.order;
  std::vector<int> sizes{ansatz_input_width(ds.ansatz, order)};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(ansatz_output_width(ds.ansatz, order));

  TrainResult res;
  std::tie(res.train_rows, res.validation_rows) =
      split_by_trajectory(ds, cfg.validation_fraction, cfg.seed);
  if (res.train_rows.empty()) throw std::invalid_argument("train: no training rows after split");

  MlpModel model = make_mlp(sizes, cfg.seed);
  {
    Eigen::MatrixXd x(ds.inputs.rows(), static_cast<Eigen::Index>(res.train_rows.size()));
    for (std::size_t i = 0; i < res.train_rows.size(); ++i) {
      x.col(static_cast<Eigen::Index>(i)) = ds.inputs.col(static_cast<Eigen::Index>(res.train_rows[i]));
    }
    const auto st = fit_standardization(x);
    model.input_mean = st.mean;
    model.input_std = st.std;
  }
  model.metadata = {{"ansatz", to_string(ds.ansatz)},
                    {"N", order},
                    {"seed", cfg.seed},
                    {"optimizer", "adam"},
                    {"epochs", cfg.epochs},
                    {"batch", cfg.batch},
                    {"lr0", cfg.lr0},
                    {"l2", cfg.l2}};
  AdamState adam = AdamState::for_model(model, cfg.l2);

  const Eigen::Index n_in = ds.inputs.rows();
  const Eigen::Index n_mul = ds.multipliers.rows();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = learning_rate(cfg, epoch);
    const auto order_rows = shuffled_rows(res.train_rows, cfg.seed, epoch);
    double loss_acc = 0.0;
    for (std::size_t start = 0; start < order_rows.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t len = std::min(static_cast<std::size_t>(cfg.batch), order_rows.size() - start);
      const auto b = static_cast<Eigen::Index>(len);
      Eigen::MatrixXd x(n_in, b);
      Eigen::MatrixXd mul(n_mul, b);
      Eigen::VectorXd t(b);
      for (Eigen::Index i = 0; i < b; ++i) {
        const auto r = static_cast<Eigen::Index>(order_rows[start + static_cast<std::size_t>(i)]);
        x.col(i) = ds.inputs.col(r);
        if (n_mul > 0) mul.col(i) = ds.multipliers.col(r);
        t[i] = ds.targets[r];
      }
      ForwardCache cache;
      const Eigen::MatrixXd out = forward_batch(model, x, &cache);
      const Eigen::VectorXd resid = ansatz_output(ds.ansatz, out, mul) - t;
      loss_acc += resid.squaredNorm();
      const Eigen::RowVectorXd dpred = (2.0 / static_cast<double>(b)) * resid.transpose();
      Eigen::MatrixXd upstream;
      if (ds.ansatz == ClosureTag::lm) {
        upstream = dpred;
      } else {
        upstream = mul.array().rowwise() * dpred.array();
      }
      adam_step(model, backward(model, cache, upstream), adam, lr);
    }
    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    log.mse = loss_acc / static_cast<double>(order_rows.size());
    if (!std::isfinite(log.mse)) throw TrainingDiverged(epoch, "train: loss is not finite");
    log.relative_l2 = relative_l2_on(model, ds, res.train_rows);
    if (!res.validation_rows.empty()) {
      log.validation_relative_l2 = relative_l2_on(model, ds, res.validation_rows);
    }
    if (!std::isfinite(log.relative_l2)) throw TrainingDiverged(epoch, "train: error is not finite");
    res.history.push_back(log);
    on_epoch(log);
  }
  res.model = std::move(model);
  return res;
}

inline TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
  return train(ds, cfg, [](const EpochLog&) {});
}

}  // namespace rtclosure
