#pragma once

#include "mlb/core.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace mlb::cdql {

/// Fully connected network: rectifier on hidden layers, identity output.
/// Batched inputs are column-major, one sample per column.
template <typename Scalar>
class Mlp {
 public:
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  struct Layer {
    Mat weight;  // out x in
    Vec bias;
  };
  using Gradients = std::vector<Layer>;

  Mlp() = default;

  /// All parameters zero.
  explicit Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw InvalidInput("Mlp: need at least input and output sizes");
    for (int s : sizes_)
      if (s < 1) throw InvalidInput("Mlp: layer sizes must be >= 1");
    for (std::size_t l = 1; l < sizes_.size(); ++l)
      layers_.push_back({Mat::Zero(sizes_[l], sizes_[l - 1]), Vec::Zero(sizes_[l])});
  }

  /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static Mlp glorot(std::vector<int> sizes, Rng& rng) {
    Mlp net(std::move(sizes));
    for (auto& layer : net.layers_) {
      const Scalar limit = std::sqrt(Scalar(6) / Scalar(layer.weight.rows() + layer.weight.cols()));
      for (Index j = 0; j < layer.weight.cols(); ++j)
        for (Index i = 0; i < layer.weight.rows(); ++i)
          layer.weight(i, j) = static_cast<Scalar>(rng.uniform(-limit, limit));
    }
    return net;
  }

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  Vec forward(const Vec& x) const {
    if (x.size() != input_size()) throw InvalidInput("Mlp::forward: input width mismatch");
    Vec a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Vec z = layers_[l].weight * a + layers_[l].bias;
      a = l + 1 < layers_.size() ? Vec(z.cwiseMax(Scalar(0))) : z;
    }
    return a;
  }

  Mat forward_batch(const Mat& x) const {
    if (x.rows() != input_size()) throw InvalidInput("Mlp::forward_batch: input width mismatch");
    Mat a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Mat z = (layers_[l].weight * a).colwise() + layers_[l].bias;
      a = l + 1 < layers_.size() ? Mat(z.cwiseMax(Scalar(0))) : z;
    }
    return a;
  }

  /// Mean Huber loss of (target_j - Q(state_j, action_j)) over the batch.
  /// When `grad` is given it receives d(loss)/d(parameters).
  Scalar huber_loss(const Mat& states, std::span<const int> actions, const Vec& targets,
                    Scalar delta, Gradients* grad = nullptr) const {
    const Index batch = states.cols();
    if (static_cast<Index>(actions.size()) != batch || targets.size() != batch)
      throw InvalidInput("Mlp::huber_loss: batch size mismatch");
    if (states.rows() != input_size()) throw InvalidInput("Mlp::huber_loss: input width mismatch");

    std::vector<Mat> pre(layers_.size()), act(layers_.size() + 1);
    act[0] = states;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      pre[l] = (layers_[l].weight * act[l]).colwise() + layers_[l].bias;
      act[l + 1] = l + 1 < layers_.size() ? Mat(pre[l].cwiseMax(Scalar(0))) : pre[l];
    }

    Scalar loss = 0;
    Mat dz = Mat::Zero(output_size(), batch);
    for (Index j = 0; j < batch; ++j) {
      const int a = actions[static_cast<std::size_t>(j)];
      if (a < 0 || a >= output_size()) throw InvalidInput("Mlp::huber_loss: action out of range");
      const Scalar e = targets[j] - act.back()(a, j);
      const Scalar ae = std::abs(e);
      loss += ae <= delta ? Scalar(0.5) * e * e : delta * (ae - Scalar(0.5) * delta);
      // d(huber)/dQ = -clip(e, -delta, delta)
      dz(a, j) = -std::clamp(e, -delta, delta) / Scalar(batch);
    }
    loss /= Scalar(batch);
    if (!grad) return loss;

    grad->resize(layers_.size());
    for (std::size_t l = layers_.size(); l-- > 0;) {
      (*grad)[l].weight = dz * act[l].transpose();
      (*grad)[l].bias = dz.rowwise().sum();
      if (l == 0) break;
      Mat da = layers_[l].weight.transpose() * dz;
      dz = da.cwiseProduct((pre[l - 1].array() > Scalar(0)).template cast<Scalar>().matrix());
    }
    return loss;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  /// Parameters layer by layer: weight (column-major) then bias.
  Vec flatten() const {
    Vec out(static_cast<Index>(parameter_count()));
    Index k = 0;
    for (const auto& l : layers_) {
      out.segment(k, l.weight.size()) = l.weight.reshaped();
      k += l.weight.size();
      out.segment(k, l.bias.size()) = l.bias;
      k += l.bias.size();
    }
    return out;
  }

  void unflatten(const Vec& params) {
    if (params.size() != static_cast<Index>(parameter_count()))
      throw InvalidInput("Mlp::unflatten: parameter count mismatch");
    Index k = 0;
    for (auto& l : layers_) {
      l.weight.reshaped() = params.segment(k, l.weight.size());
      k += l.weight.size();
      l.bias = params.segment(k, l.bias.size());
      k += l.bias.size();
    }
  }

  bool same_shape(const Mlp& other) const { return sizes_ == other.sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<Layer> layers_;
};

/// target <- tau * online + (1 - tau) * target
template <typename Scalar>
void polyak(Mlp<Scalar>& target, const Mlp<Scalar>& online, Scalar tau) {
  if (!target.same_shape(online)) throw InvalidInput("polyak: network shapes differ");
  auto& t = target.layers();
  const auto& o = online.layers();
  for (std::size_t l = 0; l < t.size(); ++l) {
    t[l].weight = tau * o[l].weight + (Scalar(1) - tau) * t[l].weight;
    t[l].bias = tau * o[l].bias + (Scalar(1) - tau) * t[l].bias;
  }
}

template <typename Scalar>
class Adam {
 public:
  struct Options {
    Scalar lr = Scalar(1e-3);
    Scalar beta1 = Scalar(0.9);
    Scalar beta2 = Scalar(0.999);
    Scalar eps = Scalar(1e-8);
  };
  using Layers = typename Mlp<Scalar>::Gradients;

  Adam() = default;
  Adam(const Mlp<Scalar>& net, Options opt) : opt_(opt) {
    for (const auto& l : net.layers()) {
      m_.push_back({Mlp<Scalar>::Mat::Zero(l.weight.rows(), l.weight.cols()),
                    Mlp<Scalar>::Vec::Zero(l.bias.size())});
    }
    v_ = m_;
  }

  void step(Mlp<Scalar>& net, const Layers& grad) {
    if (grad.size() != m_.size()) throw InvalidInput("Adam::step: gradient shape mismatch");
    ++t_;
    const Scalar c1 = Scalar(1) - std::pow(opt_.beta1, Scalar(t_));
    const Scalar c2 = Scalar(1) - std::pow(opt_.beta2, Scalar(t_));
    auto apply = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = opt_.beta1 * m + (Scalar(1) - opt_.beta1) * g;
      v = opt_.beta2 * v + (Scalar(1) - opt_.beta2) * g.cwiseAbs2();
      param.array() -= opt_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + opt_.eps);
    };
    auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      apply(layers[l].weight, m_[l].weight, v_[l].weight, grad[l].weight);
      apply(layers[l].bias, m_[l].bias, v_[l].bias, grad[l].bias);
    }
  }

  const Options& options() const { return opt_; }
  long steps() const { return t_; }
  Layers& first_moment() { return m_; }
  Layers& second_moment() { return v_; }
  const Layers& first_moment() const { return m_; }
  const Layers& second_moment() const { return v_; }
  void set_steps(long t) { t_ = t; }

 private:
  Options opt_;
  Layers m_, v_;
  long t_ = 0;
};

using MlpD = Mlp<double>;
using AdamD = Adam<double>;

}  // namespace mlb::cdql
