#pragma once

#include "dntk/types.hpp"

#include <cstdint>
#include <vector>

namespace dntk::tangent {

enum class Activation { Tanh, Relu };

/// A fully connected network. `theta` stores, layer by layer, the weight
/// matrix W_l (d_{l+1} x d_l, row-major) followed by the bias b_l.
struct MlpParams {
  std::vector<Index> layer_sizes;  // d_in, d_1, ..., C
  Vector theta;
  Activation activation = Activation::Tanh;

  Index input_dim() const { return layer_sizes.front(); }
  Index output_dim() const { return layer_sizes.back(); }
  Index layer_count() const { return static_cast<Index>(layer_sizes.size()) - 1; }
  Index param_count() const { return theta.size(); }

  /// Offset of W_l inside theta; the bias follows immediately after it.
  Index weight_offset(Index layer) const;

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> weight(Index layer) const;
  Eigen::Map<RowMajor> weight(Index layer);
  Eigen::Map<const Vector> bias(Index layer) const;
  Eigen::Map<Vector> bias(Index layer);
};

Index param_count(const std::vector<Index>& layer_sizes);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
MlpParams init_params(const std::vector<Index>& layer_sizes, Activation activation, std::uint64_t seed);

struct LabeledDataset {
  Matrix inputs;            // n x d_in
  std::vector<int> labels;  // class ids in [0, C)
  int class_count = 0;

  Index size() const { return inputs.rows(); }
  Matrix one_hot() const;
};

/// C Gaussian blobs: class means ~ N(0, I), points = mean + spread * N(0, I).
/// Sample i has label i mod C.
LabeledDataset gen_gaussian_mixture(int class_count, Index per_class, Index dim, double spread,
                                    std::uint64_t seed);

Vector forward(const MlpParams& params, const Eigen::Ref<const Vector>& x);

/// Row c is the gradient of logit c with respect to theta.
Matrix per_logit_gradient(const MlpParams& params, const Eigen::Ref<const Vector>& x);

struct TrainOptions {
  double lr = 0.05;
  Index epochs = 20;
  Index batch = 32;
  std::uint64_t seed = 0;
};

struct TrainResult {
  MlpParams params;
  std::vector<double> epoch_loss;  // full-set cross-entropy after each epoch
};

/// Minibatch SGD on softmax cross-entropy. Throws Divergence on a non-finite loss.
TrainResult train_sgd(const MlpParams& params, const LabeledDataset& data, const TrainOptions& options);

double cross_entropy(const MlpParams& params, const LabeledDataset& data);

/// Per-class gradient matrices at every row of `inputs`; `targets` are stored
/// unchanged as the feature labels.
GradientFeatures extract_features(const MlpParams& params, const Matrix& inputs, const Matrix& targets);

/// Logits for every row of `inputs` (n x C).
Matrix forward_batch(const MlpParams& params, const Matrix& inputs);

enum class Loss { Squared, CrossEntropy };

struct ChainRuleResult {
  double residual = 0.0;
  bool relative = true;  // false when the loss gradient vanished
};

/// Compares grad_theta loss with sum_c delta_c * grad_theta f^c, where delta is
/// the loss gradient at the logits.
ChainRuleResult chain_rule_check(const MlpParams& params, const Eigen::Ref<const Vector>& x,
                                 const Eigen::Ref<const Vector>& y, Loss loss);

/// Gradient of the loss at the logits z.
Vector loss_logit_gradient(const Vector& z, const Vector& y, Loss loss);

/// Full backward pass seeded with an arbitrary upstream gradient at the logits.
Vector backprop(const MlpParams& params, const Eigen::Ref<const Vector>& x, const Vector& upstream);

}  // namespace dntk::tangent
