#include "macl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>
#include <sstream>

#include "macl/error.hpp"
#include "macl/gradient.hpp"
#include "macl/random.hpp"

namespace macl {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (batch_size < 2) throw Error("batch_size must be >= 2");
  if (!(learning_rate >= 0.0)) throw Error("learning_rate must be >= 0");
  if (!(weight_decay >= 0.0)) throw Error("weight_decay must be >= 0");
  if (!(clip_max_norm > 0.0)) throw Error("clip_max_norm must be > 0");
  if (schedule.kind == LrSchedule::Kind::kCosineWindows &&
      (schedule.window_epochs < 1 || !(schedule.window_decay >= 0.0 && schedule.window_decay < 1.0))) {
    throw Error("schedule window must be >= 1 epoch with decay in [0, 1)");
  }
  if (augment.enabled && !(augment.noise_sigma >= 0.0)) throw Error("augment noise_sigma must be >= 0");
  if (output_dim < 1 || (hidden_dim && *hidden_dim < 1)) throw Error("encoder dimensions must be >= 1");
  loss.validate();
}

double lr_schedule(const TrainConfig& config, std::size_t epoch) {
  if (epoch >= config.epochs) throw Error("epoch " + std::to_string(epoch) + " out of schedule range");
  const LrSchedule& s = config.schedule;
  if (s.kind == LrSchedule::Kind::kConstant) return config.learning_rate;

  const std::size_t window = epoch / s.window_epochs;
  const double phase = static_cast<double>(epoch % s.window_epochs) / static_cast<double>(s.window_epochs);
  const double keep = 1.0 - s.window_decay;
  const double start = std::pow(keep, static_cast<double>(window));
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * phase));
  return config.learning_rate * start * (keep + s.window_decay * cosine);
}

TrainState init_train_state(std::size_t input_dim, const TrainConfig& config) {
  const EncoderSpec spec{input_dim, config.hidden_dim, config.output_dim};
  TrainState state{Encoder::random(spec, config.seed), {}, {}, 0};
  const auto p = static_cast<Eigen::Index>(state.encoder.parameter_count());
  state.optimizer.first_moment = Eigen::VectorXd::Zero(p);
  state.optimizer.second_moment = Eigen::VectorXd::Zero(p);
  return state;
}

std::pair<LossBreakdown, Eigen::VectorXd> encoder_loss_gradient(const Encoder& encoder,
                                                                const Eigen::MatrixXd& features,
                                                                std::span<const LabelSet> labels,
                                                                const CorpusLabelStats* stats,
                                                                const LossHyperparams& hyper) {
  const Encoder::Forward fwd = encoder.forward(features);
  const BatchView batch(fwd.output, labels);
  BatchGradient bg = batch_loss_gradient(batch, stats, hyper);
  Eigen::VectorXd grad = encoder.backward(fwd, bg.embeddings);
  return {std::move(bg.loss), std::move(grad)};
}

double clip_global_norm(Eigen::VectorXd& grad, double max_norm) {
  const double norm = grad.norm();
  if (norm > max_norm) grad *= max_norm / norm;
  return norm;
}

StepReport train_step(TrainState& state, const Eigen::MatrixXd& features, std::span<const LabelSet> labels,
                      const CorpusLabelStats* stats, const TrainConfig& config, double learning_rate) {
  auto [loss, grad] = encoder_loss_gradient(state.encoder, features, labels, stats, config.loss);
  if (!std::isfinite(loss.total) || !grad.allFinite()) throw NumericalError("non-finite loss");

  StepReport report;
  report.loss = loss.total;
  report.grad_norm = clip_global_norm(grad, config.clip_max_norm);
  report.clipped_grad_norm = grad.norm();

  AdamState& adam = state.optimizer;
  ++adam.step;
  adam.first_moment = kAdamBeta1 * adam.first_moment + (1.0 - kAdamBeta1) * grad;
  adam.second_moment = kAdamBeta2 * adam.second_moment + (1.0 - kAdamBeta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam.step));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam.step));

  Eigen::VectorXd params = state.encoder.parameters();
  const Eigen::VectorXd direction =
      (adam.first_moment / c1).array() / ((adam.second_moment / c2).array().sqrt() + kAdamEpsilon);
  params -= learning_rate * (direction + config.weight_decay * params);
  state.encoder.set_parameters(params);
  return report;
}

TrainState train(const Dataset& dataset, const CorpusLabelStats& stats, const TrainConfig& config,
                 const EpochCallback& on_epoch) {
  config.validate();
  const std::size_t n = dataset.size();
  if (n < config.batch_size) {
    throw Error("dataset has " + std::to_string(n) + " samples, fewer than batch_size " +
                std::to_string(config.batch_size));
  }

  TrainState state = init_train_state(dataset.feature_dim(), config);
  Rng shuffle_rng = make_rng(config.seed, "shuffle");
  Rng augment_rng = make_rng(config.seed, "augment");
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto dim = static_cast<Eigen::Index>(dataset.feature_dim());
  const std::size_t views = config.augment.enabled ? 2 : 1;

  std::vector<std::size_t> order(n);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const double lr = lr_schedule(config, epoch);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, n - start);
      if (count < 2) continue;

      const auto rows = static_cast<Eigen::Index>(count * views);
      Eigen::MatrixXd x(rows, dim);
      std::vector<LabelSet> labels(static_cast<std::size_t>(rows));
      for (std::size_t v = 0; v < views; ++v) {
        for (std::size_t b = 0; b < count; ++b) {
          const std::size_t src = order[start + b];
          const auto r = static_cast<Eigen::Index>(v * count + b);
          x.row(r) = dataset.features.row(static_cast<Eigen::Index>(src));
          if (config.augment.enabled) {
            for (Eigen::Index c = 0; c < dim; ++c) x(r, c) += config.augment.noise_sigma * noise(augment_rng);
          }
          labels[static_cast<std::size_t>(r)] = dataset.labels[src];
        }
      }

      StepReport step;
      try {
        step = train_step(state, x, labels, &stats, config, lr);
      } catch (const NumericalError& e) {
        std::ostringstream dump;
        dump << e.what() << " at epoch " << epoch + 1 << ", batch " << batches + 1 << " [";
        for (std::size_t b = 0; b < count; ++b) {
          const std::size_t src = order[start + b];
          dump << (b ? " " : "") << (src < dataset.ids.size() ? dataset.ids[src] : std::to_string(src))
               << dataset.labels[src].to_string();
        }
        dump << "]";
        throw NumericalError(dump.str());
      }
      loss_sum += step.loss;
      ++batches;
    }
    const double mean = batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0;
    state.loss_curve.push_back(mean);
    state.epochs_completed = epoch + 1;
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return state;
}

}  // namespace macl
