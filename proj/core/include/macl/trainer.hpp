#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "macl/corpus_stats.hpp"
#include "macl/dataset.hpp"
#include "macl/encoder.hpp"
#include "macl/losses.hpp"

namespace macl {

// Learning-rate schedule. kCosineWindows anneals along a half cosine inside
// consecutive windows of `window_epochs`, each window ending `window_decay`
// below where it started, so the curve is continuous and non-increasing.
struct LrSchedule {
  enum class Kind { kConstant, kCosineWindows };
  Kind kind = Kind::kCosineWindows;
  std::size_t window_epochs = 15;
  double window_decay = 0.2;

  bool operator==(const LrSchedule&) const = default;
};

struct AugmentConfig {
  bool enabled = true;  // two noisy views per sample
  double noise_sigma = 0.05;

  bool operator==(const AugmentConfig&) const = default;
};

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  double weight_decay = 5e-4;
  double clip_max_norm = 1.0;
  LrSchedule schedule;
  std::uint64_t seed = 0;
  LossHyperparams loss;
  AugmentConfig augment;
  std::optional<std::size_t> hidden_dim = 64;
  std::size_t output_dim = 16;

  void validate() const;
};

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  std::size_t step = 0;
};

struct TrainState {
  Encoder encoder;
  AdamState optimizer;
  std::vector<double> loss_curve;  // one epoch-mean loss per completed epoch
  std::size_t epochs_completed = 0;
};

double lr_schedule(const TrainConfig& config, std::size_t epoch);

/// Gradient norms and loss of one optimizer step.
struct StepReport {
  double loss = 0.0;
  double grad_norm = 0.0;          // before clipping
  double clipped_grad_norm = 0.0;  // after clipping
};

/// Fresh state: seeded random encoder and zeroed moments.
TrainState init_train_state(std::size_t input_dim, const TrainConfig& config);

/// Mean loss over the batch and its gradient with respect to the flat encoder
/// parameters, backpropagated through normalization and the encoder.
std::pair<LossBreakdown, Eigen::VectorXd> encoder_loss_gradient(const Encoder& encoder,
                                                                const Eigen::MatrixXd& features,
                                                                std::span<const LabelSet> labels,
                                                                const CorpusLabelStats* stats,
                                                                const LossHyperparams& hyper);

/// Scales `grad` in place so its norm is at most `max_norm`; returns the
/// norm before clipping.
double clip_global_norm(Eigen::VectorXd& grad, double max_norm);

/// Forward, backward, clip and one AdamW update at `learning_rate`.
/// Throws NumericalError (with the batch ids listed) on a non-finite loss.
StepReport train_step(TrainState& state, const Eigen::MatrixXd& features, std::span<const LabelSet> labels,
                      const CorpusLabelStats* stats, const TrainConfig& config, double learning_rate);

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Seeded mini-batch training over `dataset`. `stats` should be built on the
/// same training split.
TrainState train(const Dataset& dataset, const CorpusLabelStats& stats, const TrainConfig& config,
                 const EpochCallback& on_epoch = {});

}  // namespace macl
