#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace macl {

/// Linear map, or two dense layers with a ReLU between them when hidden_dim is set.
struct EncoderSpec {
  std::size_t input_dim = 1;
  std::optional<std::size_t> hidden_dim;
  std::size_t output_dim = 1;

  void validate() const;
  bool operator==(const EncoderSpec&) const = default;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Feature encoder followed by row-wise unit normalization.
class Encoder {
 public:
  explicit Encoder(const EncoderSpec& spec);  // zero parameters

  /// Weights uniform on ±1/sqrt(fan_in), biases zero.
  static Encoder random(const EncoderSpec& spec, std::uint64_t seed);
  /// Linear identity map on `dim` features.
  static Encoder identity(std::size_t dim);

  const EncoderSpec& spec() const { return spec_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  std::size_t parameter_count() const;
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);

  /// Activations kept for the backward pass.
  struct Forward {
    std::vector<Eigen::MatrixXd> inputs;  // input of each layer (N x in)
    std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer (N x out)
    Eigen::VectorXd norms;                // row norms of the final pre-normalization output
    Eigen::MatrixXd output;               // unit-norm rows
  };

  /// N x output_dim unit-norm rows. Throws NumericalError("degenerate embedding").
  Eigen::MatrixXd encode(const Eigen::MatrixXd& features) const;
  Forward forward(const Eigen::MatrixXd& features) const;

  /// Flat parameter gradient given d loss / d output (N x output_dim).
  Eigen::VectorXd backward(const Forward& forward, const Eigen::MatrixXd& grad_output) const;

 private:
  EncoderSpec spec_;
  std::vector<DenseLayer> layers_;
};

}  // namespace macl
