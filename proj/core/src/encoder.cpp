#include "macl/encoder.hpp"

#include <cmath>

#include "macl/error.hpp"
#include "macl/random.hpp"

namespace macl {

void EncoderSpec::validate() const {
  if (input_dim < 1 || output_dim < 1 || (hidden_dim && *hidden_dim < 1)) {
    throw Error("encoder dimensions must be >= 1");
  }
}

Encoder::Encoder(const EncoderSpec& spec) : spec_(spec) {
  spec_.validate();
  auto add = [&](std::size_t in, std::size_t out) {
    layers_.push_back({Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)),
                       Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))});
  };
  if (spec_.hidden_dim) {
    add(spec_.input_dim, *spec_.hidden_dim);
    add(*spec_.hidden_dim, spec_.output_dim);
  } else {
    add(spec_.input_dim, spec_.output_dim);
  }
}

Encoder Encoder::random(const EncoderSpec& spec, std::uint64_t seed) {
  Encoder enc(spec);
  Rng rng = make_rng(seed, "encoder-init");
  for (DenseLayer& layer : enc.layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    // Row-major fill order so the draw sequence does not depend on storage.
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
    }
  }
  return enc;
}

Encoder Encoder::identity(std::size_t dim) {
  Encoder enc(EncoderSpec{dim, std::nullopt, dim});
  enc.layers_[0].weight.setIdentity();
  return enc;
}

std::size_t Encoder::parameter_count() const {
  std::size_t count = 0;
  for (const DenseLayer& l : layers_) count += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return count;
}

Eigen::VectorXd Encoder::parameters() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index at = 0;
  for (const DenseLayer& l : layers_) {
    flat.segment(at, l.weight.size()) = l.weight.reshaped();
    at += l.weight.size();
    flat.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
  return flat;
}

void Encoder::set_parameters(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) throw Error("parameter count mismatch");
  Eigen::Index at = 0;
  for (DenseLayer& l : layers_) {
    l.weight.reshaped() = flat.segment(at, l.weight.size());
    at += l.weight.size();
    l.bias = flat.segment(at, l.bias.size());
    at += l.bias.size();
  }
}

Encoder::Forward Encoder::forward(const Eigen::MatrixXd& features) const {
  if (static_cast<std::size_t>(features.cols()) != spec_.input_dim) {
    throw Error("feature width " + std::to_string(features.cols()) + " does not match encoder input_dim " +
                std::to_string(spec_.input_dim));
  }
  Forward f;
  Eigen::MatrixXd current = features;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const DenseLayer& l = layers_[k];
    Eigen::MatrixXd pre = current * l.weight.transpose();
    pre.rowwise() += l.bias.transpose();
    f.inputs.push_back(std::move(current));
    current = k + 1 < layers_.size() ? Eigen::MatrixXd(pre.cwiseMax(0.0)) : pre;
    f.pre.push_back(std::move(pre));
  }
  f.norms = current.rowwise().norm();
  for (Eigen::Index r = 0; r < current.rows(); ++r) {
    if (!(f.norms(r) > 0.0) || !std::isfinite(f.norms(r))) throw NumericalError("degenerate embedding");
  }
  f.output = f.norms.cwiseInverse().asDiagonal() * current;
  return f;
}

Eigen::MatrixXd Encoder::encode(const Eigen::MatrixXd& features) const { return forward(features).output; }

Eigen::VectorXd Encoder::backward(const Forward& f, const Eigen::MatrixXd& grad_output) const {
  // Through u -> u / |u|: (g - (g.z) z) / |u| per row.
  const Eigen::VectorXd radial = (grad_output.cwiseProduct(f.output)).rowwise().sum();
  Eigen::MatrixXd grad_pre =
      f.norms.cwiseInverse().asDiagonal() * (grad_output - radial.asDiagonal() * f.output);

  std::vector<Eigen::MatrixXd> weight_grads(layers_.size());
  std::vector<Eigen::VectorXd> bias_grads(layers_.size());
  for (std::size_t k = layers_.size(); k-- > 0;) {
    weight_grads[k] = grad_pre.transpose() * f.inputs[k];
    bias_grads[k] = grad_pre.colwise().sum().transpose();
    if (k == 0) break;
    Eigen::MatrixXd grad_input = grad_pre * layers_[k].weight;
    grad_pre = grad_input.cwiseProduct((f.pre[k - 1].array() > 0.0).cast<double>().matrix());
  }

  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    flat.segment(at, weight_grads[k].size()) = weight_grads[k].reshaped();
    at += weight_grads[k].size();
    flat.segment(at, bias_grads[k].size()) = bias_grads[k];
    at += bias_grads[k].size();
  }
  return flat;
}

}  // namespace macl
