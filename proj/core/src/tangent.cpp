#include "dntk/tangent.hpp"

#include "dntk/error.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace dntk::tangent {
namespace {

void check_sizes(const std::vector<Index>& sizes) {
  if (sizes.size() < 2) throw Error(ErrorCode::BadArgument, "need at least input and output widths");
  for (Index s : sizes)
    if (s <= 0) throw Error(ErrorCode::BadArgument, "layer widths must be positive");
}

double activate(double z, Activation a) { return a == Activation::Tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0); }

double activate_grad(double z, Activation a) {
  if (a == Activation::Tanh) {
    const double t = std::tanh(z);
    return 1.0 - t * t;
  }
  return z > 0.0 ? 1.0 : 0.0;
}

struct Trace {
  std::vector<Vector> pre;   // z_l for l = 1..L
  std::vector<Vector> post;  // a_0 = x, a_l = sigma(z_l) (last is linear)
};

Trace run_forward(const MlpParams& p, const Eigen::Ref<const Vector>& x) {
  if (x.size() != p.input_dim()) throw Error(ErrorCode::DimMismatch, "input width does not match the network");
  Trace t;
  t.post.emplace_back(x);
  const Index layers = p.layer_count();
  for (Index l = 0; l < layers; ++l) {
    Vector z = p.weight(l) * t.post.back() + p.bias(l);
    Vector a = z;
    if (l + 1 < layers) a = z.unaryExpr([&](double v) { return activate(v, p.activation); });
    t.pre.push_back(std::move(z));
    t.post.push_back(std::move(a));
  }
  return t;
}

// Backward pass for a batch of upstream seeds (rows of `delta`, each d_L wide).
// Returns one gradient row per seed.
Matrix run_backward(const MlpParams& p, const Trace& t, Matrix delta) {
  Matrix grads(delta.rows(), p.param_count());
  for (Index l = p.layer_count() - 1; l >= 0; --l) {
    const Index d_out = p.layer_sizes[l + 1];
    const Index d_in = p.layer_sizes[l];
    const Index off = p.weight_offset(l);
    const Vector& a_prev = t.post[l];
    for (Index r = 0; r < delta.rows(); ++r) {
      // dW[i, j] = delta_i * a_prev_j, stored row-major
      for (Index i = 0; i < d_out; ++i)
        grads.row(r).segment(off + i * d_in, d_in) = delta(r, i) * a_prev.transpose();
      grads.row(r).segment(off + d_out * d_in, d_out) = delta.row(r);
    }
    if (l > 0) {
      Matrix back = delta * p.weight(l);
      const Vector& z_prev = t.pre[l - 1];
      for (Index j = 0; j < d_in; ++j) back.col(j) *= activate_grad(z_prev[j], p.activation);
      delta = std::move(back);
    }
  }
  return grads;
}

}  // namespace

Index param_count(const std::vector<Index>& layer_sizes) {
  check_sizes(layer_sizes);
  Index total = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
    total += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  return total;
}

Index MlpParams::weight_offset(Index layer) const {
  Index off = 0;
  for (Index l = 0; l < layer; ++l) off += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  return off;
}

Eigen::Map<const MlpParams::RowMajor> MlpParams::weight(Index layer) const {
  return {theta.data() + weight_offset(layer), layer_sizes[layer + 1], layer_sizes[layer]};
}

Eigen::Map<MlpParams::RowMajor> MlpParams::weight(Index layer) {
  return {theta.data() + weight_offset(layer), layer_sizes[layer + 1], layer_sizes[layer]};
}

Eigen::Map<const Vector> MlpParams::bias(Index layer) const {
  return {theta.data() + weight_offset(layer) + layer_sizes[layer] * layer_sizes[layer + 1], layer_sizes[layer + 1]};
}

Eigen::Map<Vector> MlpParams::bias(Index layer) {
  return {theta.data() + weight_offset(layer) + layer_sizes[layer] * layer_sizes[layer + 1], layer_sizes[layer + 1]};
}

MlpParams init_params(const std::vector<Index>& layer_sizes, Activation activation, std::uint64_t seed) {
  MlpParams p;
  p.layer_sizes = layer_sizes;
  p.activation = activation;
  p.theta = Vector::Zero(param_count(layer_sizes));
  std::mt19937_64 rng(seed);
  for (Index l = 0; l < p.layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer_sizes[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = p.weight(l);
    for (Index i = 0; i < w.rows(); ++i)
      for (Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
    auto b = p.bias(l);
    for (Index i = 0; i < b.size(); ++i) b[i] = dist(rng);
  }
  return p;
}

Matrix LabeledDataset::one_hot() const {
  Matrix y = Matrix::Zero(size(), class_count);
  for (Index i = 0; i < size(); ++i) y(i, labels[i]) = 1.0;
  return y;
}

LabeledDataset gen_gaussian_mixture(int class_count, Index per_class, Index dim, double spread,
                                    std::uint64_t seed) {
  if (class_count < 2) throw Error(ErrorCode::BadArgument, "need at least two classes");
  if (per_class < 1 || dim < 1) throw Error(ErrorCode::BadArgument, "per_class and dim must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix means(class_count, dim);
  for (Index c = 0; c < class_count; ++c)
    for (Index j = 0; j < dim; ++j) means(c, j) = normal(rng);

  LabeledDataset data;
  data.class_count = class_count;
  const Index n = per_class * class_count;
  data.inputs.resize(n, dim);
  data.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % class_count);
    data.labels[i] = c;
    for (Index j = 0; j < dim; ++j) data.inputs(i, j) = means(c, j) + spread * normal(rng);
  }
  return data;
}

Vector forward(const MlpParams& params, const Eigen::Ref<const Vector>& x) {
  return run_forward(params, x).post.back();
}

Matrix forward_batch(const MlpParams& params, const Matrix& inputs) {
  Matrix out(inputs.rows(), params.output_dim());
  for (Index i = 0; i < inputs.rows(); ++i) out.row(i) = forward(params, inputs.row(i).transpose()).transpose();
  return out;
}

Matrix per_logit_gradient(const MlpParams& params, const Eigen::Ref<const Vector>& x) {
  const Trace t = run_forward(params, x);
  return run_backward(params, t, Matrix::Identity(params.output_dim(), params.output_dim()));
}

Vector backprop(const MlpParams& params, const Eigen::Ref<const Vector>& x, const Vector& upstream) {
  const Trace t = run_forward(params, x);
  if (upstream.size() != params.output_dim()) throw Error(ErrorCode::DimMismatch, "upstream gradient width");
  return run_backward(params, t, upstream.transpose()).row(0).transpose();
}

namespace {

Vector softmax(const Vector& z) {
  const double zmax = z.maxCoeff();
  Vector e = (z.array() - zmax).exp();
  return e / e.sum();
}

}  // namespace

double cross_entropy(const MlpParams& params, const LabeledDataset& data) {
  double total = 0.0;
  for (Index i = 0; i < data.size(); ++i) {
    const Vector z = forward(params, data.inputs.row(i).transpose());
    const double zmax = z.maxCoeff();
    const double lse = zmax + std::log((z.array() - zmax).exp().sum());
    total += lse - z[data.labels[i]];
  }
  return total / static_cast<double>(data.size());
}

TrainResult train_sgd(const MlpParams& params, const LabeledDataset& data, const TrainOptions& options) {
  if (!(options.lr > 0.0)) throw Error(ErrorCode::BadArgument, "learning rate must be positive");
  if (options.batch < 1) throw Error(ErrorCode::BadArgument, "batch must be positive");
  if (data.inputs.cols() != params.input_dim()) throw Error(ErrorCode::DimMismatch, "dataset width");

  TrainResult result{params, {}};
  std::mt19937_64 rng(options.seed);
  std::vector<Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), Index{0});

  for (Index epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(options.batch)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(options.batch));
      Vector grad = Vector::Zero(result.params.param_count());
      for (std::size_t b = start; b < stop; ++b) {
        const Index i = order[b];
        const Trace t = run_forward(result.params, data.inputs.row(i).transpose());
        Vector delta = softmax(t.post.back());
        delta[data.labels[i]] -= 1.0;
        grad += run_backward(result.params, t, delta.transpose()).row(0).transpose();
      }
      result.params.theta -= (options.lr / static_cast<double>(stop - start)) * grad;
    }
    const double loss = cross_entropy(result.params, data);
    if (!std::isfinite(loss)) throw Error(ErrorCode::Divergence, "training loss is not finite");
    result.epoch_loss.push_back(loss);
  }
  return result;
}

GradientFeatures extract_features(const MlpParams& params, const Matrix& inputs, const Matrix& targets) {
  if (inputs.cols() != params.input_dim()) throw Error(ErrorCode::DimMismatch, "input width");
  if (targets.rows() != inputs.rows() || targets.cols() != params.output_dim())
    throw Error(ErrorCode::DimMismatch, "targets must be n x C");
  const Index n = inputs.rows();
  const Index classes = params.output_dim();
  GradientFeatures f;
  f.dim_kind = DimKind::RawParams;
  f.per_class.assign(static_cast<std::size_t>(classes), Matrix(n, params.param_count()));
  f.labels = targets;
  f.model_logits.resize(n, classes);
  for (Index i = 0; i < n; ++i) {
    const Trace t = run_forward(params, inputs.row(i).transpose());
    f.model_logits.row(i) = t.post.back().transpose();
    const Matrix g = run_backward(params, t, Matrix::Identity(classes, classes));
    for (Index c = 0; c < classes; ++c) f.per_class[c].row(i) = g.row(c);
  }
  return f;
}

Vector loss_logit_gradient(const Vector& z, const Vector& y, Loss loss) {
  if (z.size() != y.size()) throw Error(ErrorCode::DimMismatch, "target width");
  if (loss == Loss::Squared) return 2.0 * (z - y);
  // l = -sum_c y_c log softmax(z)_c  =>  dl/dz = softmax(z) * sum(y) - y
  return softmax(z) * y.sum() - y;
}

ChainRuleResult chain_rule_check(const MlpParams& params, const Eigen::Ref<const Vector>& x,
                                 const Eigen::Ref<const Vector>& y, Loss loss) {
  const Vector z = forward(params, x);
  const Vector delta = loss_logit_gradient(z, y, loss);
  const Vector direct = backprop(params, x, delta);
  const Matrix phi = per_logit_gradient(params, x);
  const Vector assembled = phi.transpose() * delta;
  const double diff = (direct - assembled).norm();
  const double norm = direct.norm();
  if (norm < 1e-14) return {diff, false};
  return {diff / norm, true};
}

}  // namespace dntk::tangent
