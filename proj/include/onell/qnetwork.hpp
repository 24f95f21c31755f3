// Copyright 2026 The onell-dac Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "onell/errors.hpp"
#include "onell/seeding.hpp"

namespace onell {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Network input for a fitness value: f / n in [0, 1].
inline double encode_fitness(std::size_t fitness, std::size_t n) {
  return static_cast<double>(fitness) / static_cast<double>(n);
}

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

// Per-layer buffers of one forward/backward pass. Columns are batch entries.
struct ForwardCache {
  std::vector<Matrix> activations;  // activations[0] is the input
  Matrix delta;
  Matrix delta_prev;
};

// Feed-forward value approximator: dense layers with rectifier activations on
// every hidden layer and an identity output, one output per action.
class QNetwork {
 public:
  QNetwork() = default;

  // Zero-initialized network with layer widths sizes[0] -> ... -> sizes.back().
  explicit QNetwork(const std::vector<int>& sizes) {
    if (sizes.size() < 2) throw InvalidParameterError("QNetwork needs at least input and output sizes");
    for (int s : sizes) {
      if (s < 1) throw InvalidParameterError("QNetwork layer sizes must be positive");
    }
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      layers_.push_back({Matrix::Zero(sizes[l + 1], sizes[l]), Vector::Zero(sizes[l + 1])});
    }
  }

  // Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static QNetwork random(const std::vector<int>& sizes, Rng& rng) {
    QNetwork q(sizes);
    for (auto& layer : q.layers_) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
      std::uniform_real_distribution<double> u(-bound, bound);
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = u(rng);
      }
      for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = u(rng);
    }
    return q;
  }

  std::size_t input_dim() const { return static_cast<std::size_t>(layers_.front().weight.cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(layers_.back().weight.rows()); }
  std::size_t num_layers() const noexcept { return layers_.size(); }

  std::vector<int> sizes() const {
    std::vector<int> s{static_cast<int>(input_dim())};
    for (const auto& l : layers_) s.push_back(static_cast<int>(l.weight.rows()));
    return s;
  }

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  std::size_t parameter_count() const {
    std::size_t c = 0;
    for (const auto& l : layers_) c += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return c;
  }

  // inputs: input_dim x batch. Returns output_dim x batch; also fills cache.
  const Matrix& forward(const Matrix& inputs, ForwardCache& cache) const {
    if (static_cast<std::size_t>(inputs.rows()) != input_dim()) {
      throw DimensionError("QNetwork::forward: input has wrong row count");
    }
    cache.activations.resize(layers_.size() + 1);
    cache.activations[0] = inputs;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Matrix& out = cache.activations[l + 1];
      out.noalias() = layers_[l].weight * cache.activations[l];
      out.colwise() += layers_[l].bias;
      if (l + 1 < layers_.size()) out = out.cwiseMax(0.0);
    }
    return cache.activations.back();
  }

  Matrix forward(const Matrix& inputs) const {
    ForwardCache cache;
    return forward(inputs, cache);
  }

  Vector q_values(double state) const {
    Matrix in(1, 1);
    in(0, 0) = state;
    return forward(in).col(0);
  }

  // Mean squared error between Q(s_b, a_b) and targets_b over the batch, and
  // its gradient with respect to every parameter (written into grad, which is
  // resized to this network's shape).
  double loss_and_gradient(const Matrix& states, std::span<const std::size_t> actions,
                           std::span<const double> targets, std::vector<DenseLayer>& grad,
                           ForwardCache& cache) const {
    const Eigen::Index batch = states.cols();
    if (static_cast<std::size_t>(batch) != actions.size() || actions.size() != targets.size()) {
      throw DimensionError("loss_and_gradient: batch sizes differ");
    }
    const Matrix& out = forward(states, cache);
    cache.delta.setZero(out.rows(), batch);
    double loss = 0.0;
    const double scale = 2.0 / static_cast<double>(batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
      const auto a = static_cast<Eigen::Index>(actions[static_cast<std::size_t>(b)]);
      const double err = out(a, b) - targets[static_cast<std::size_t>(b)];
      loss += err * err;
      cache.delta(a, b) = scale * err;
    }
    loss /= static_cast<double>(batch);

    backward(cache, grad);
    return loss;
  }

  // Backpropagates cache.delta (d loss / d output, output_dim x batch) through
  // the pass recorded in `cache` and writes parameter gradients into grad.
  void backward(ForwardCache& cache, std::vector<DenseLayer>& grad) const {
    if (cache.activations.size() != layers_.size() + 1) throw StateError("backward without a matching forward");
    grad.resize(layers_.size());
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const Matrix& input = cache.activations[l];
      grad[l].weight.noalias() = cache.delta * input.transpose();
      grad[l].bias = cache.delta.rowwise().sum();
      if (l > 0) {
        cache.delta_prev.noalias() = layers_[l].weight.transpose() * cache.delta;
        // Rectifier derivative: activation > 0.
        cache.delta_prev = (input.array() > 0.0).select(cache.delta_prev, 0.0);
        cache.delta.swap(cache.delta_prev);
      }
    }
  }

  // this <- tau * source + (1 - tau) * this
  void soft_update_from(const QNetwork& source, double tau) {
    if (source.sizes() != sizes()) throw DimensionError("soft_update_from: shapes differ");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      layers_[l].weight = tau * source.layers_[l].weight + (1.0 - tau) * layers_[l].weight;
      layers_[l].bias = tau * source.layers_[l].bias + (1.0 - tau) * layers_[l].bias;
    }
  }

  bool all_finite() const {
    for (const auto& l : layers_) {
      if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    }
    return true;
  }

  // Flat parameter view, layer by layer: weights row-major, then biases.
  std::vector<double> flat_parameters() const {
    std::vector<double> p;
    p.reserve(parameter_count());
    for (const auto& l : layers_) {
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) p.push_back(l.weight(r, c));
      }
      for (Eigen::Index r = 0; r < l.bias.size(); ++r) p.push_back(l.bias(r));
    }
    return p;
  }

  void set_flat_parameters(std::span<const double> p) {
    if (p.size() != parameter_count()) throw DimensionError("set_flat_parameters: wrong length");
    std::size_t i = 0;
    for (auto& l : layers_) {
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = p[i++];
      }
      for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = p[i++];
    }
  }

  friend bool operator==(const QNetwork& a, const QNetwork& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t l = 0; l < a.layers_.size(); ++l) {
      const auto& x = a.layers_[l];
      const auto& y = b.layers_[l];
      if (x.weight.rows() != y.weight.rows() || x.weight.cols() != y.weight.cols()) return false;
      if (x.weight != y.weight || x.bias != y.bias) return false;
    }
    return true;
  }

  // Text dump:
  //   onell-qnet v1
  //   layers <L>
  //   dense <out> <in>            (per layer, followed by)
  //   <out*in weights, row-major, C99 hex floats>
  //   <out biases>
  // Hex floats make the round trip bit-exact.
  void save(std::ostream& os) const {
    os << "onell-qnet v1\n";
    os << "layers " << layers_.size() << "\n";
    char buf[64];
    auto put = [&](double v, bool last) {
      std::snprintf(buf, sizeof(buf), "%a", v);
      os << buf << (last ? '\n' : ' ');
    };
    for (const auto& l : layers_) {
      os << "dense " << l.weight.rows() << " " << l.weight.cols() << "\n";
      const Eigen::Index nw = l.weight.size();
      Eigen::Index k = 0;
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) put(l.weight(r, c), ++k == nw);
      }
      for (Eigen::Index r = 0; r < l.bias.size(); ++r) put(l.bias(r), r + 1 == l.bias.size());
    }
  }

  void save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    save(os);
    if (!os) throw std::runtime_error("write failed: " + path);
  }

  static QNetwork load(std::istream& is) {
    std::string line;
    std::size_t lineno = 0;
    auto next = [&]() -> std::string {
      if (!std::getline(is, line)) throw ParseError("unexpected end of network file", lineno + 1);
      ++lineno;
      return line;
    };
    if (next() != "onell-qnet v1") throw ParseError("expected header 'onell-qnet v1'", lineno);
    std::size_t num_layers = 0;
    {
      std::istringstream ss(next());
      std::string tag;
      if (!(ss >> tag >> num_layers) || tag != "layers" || num_layers == 0) {
        throw ParseError("expected 'layers <count>'", lineno);
      }
    }
    auto read_values = [&](Eigen::Index count) {
      std::vector<double> v;
      std::istringstream ss(next());
      std::string tok;
      while (ss >> tok) {
        char* end = nullptr;
        const double d = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0') throw ParseError("bad number '" + tok + "'", lineno);
        v.push_back(d);
      }
      if (static_cast<Eigen::Index>(v.size()) != count) {
        throw ParseError("expected " + std::to_string(count) + " values, got " + std::to_string(v.size()), lineno);
      }
      return v;
    };
    QNetwork q;
    for (std::size_t l = 0; l < num_layers; ++l) {
      Eigen::Index rows = 0, cols = 0;
      std::istringstream ss(next());
      std::string tag;
      if (!(ss >> tag >> rows >> cols) || tag != "dense" || rows < 1 || cols < 1) {
        throw ParseError("expected 'dense <out> <in>'", lineno);
      }
      if (!q.layers_.empty() && q.layers_.back().weight.rows() != cols) {
        throw ParseError("layer input width does not match previous output", lineno);
      }
      DenseLayer layer{Matrix(rows, cols), Vector(rows)};
      const auto w = read_values(rows * cols);
      for (Eigen::Index r = 0, k = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = w[static_cast<std::size_t>(k++)];
      }
      const auto b = read_values(rows);
      for (Eigen::Index r = 0; r < rows; ++r) layer.bias(r) = b[static_cast<std::size_t>(r)];
      q.layers_.push_back(std::move(layer));
    }
    return q;
  }

  static QNetwork load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return load(is);
  }

 private:
  std::vector<DenseLayer> layers_;
};

// Index of the largest entry; ties resolve to the smallest index.
inline std::size_t argmax_first(const Eigen::Ref<const Vector>& v) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
  }
  return best;
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(const QNetwork& shape, AdamConfig cfg = {}) : cfg_(cfg) {
    for (const auto& l : shape.layers()) {
      m_.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
      v_.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    }
  }

  void step(QNetwork& net, const std::vector<DenseLayer>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    const double step = cfg_.lr / c1;
    const double sqrt_c2 = std::sqrt(c2);
    auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      update(layers[l].weight.array(), grad[l].weight.array(), m_[l].weight.array(), v_[l].weight.array(), step,
             sqrt_c2);
      update(layers[l].bias.array(), grad[l].bias.array(), m_[l].bias.array(), v_[l].bias.array(), step, sqrt_c2);
    }
  }

  long steps() const noexcept { return t_; }

 private:
  // p -= lr/c1 * m / (sqrt(v)/sqrt(c2) + eps)
  template <typename P, typename G, typename M, typename V>
  void update(P&& p, const G& g, M&& m, V&& v, double step, double sqrt_c2) const {
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.square();
    p -= step * m / (v.sqrt() / sqrt_c2 + cfg_.eps);
  }

  AdamConfig cfg_;
  std::vector<DenseLayer> m_;
  std::vector<DenseLayer> v_;
  long t_ = 0;
};

}  // namespace onell
