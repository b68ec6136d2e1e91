/******************************************************************************
 * Copyright 2026 The crllk Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *****************************************************************************/

/**
 * @file
 * Feed-forward policy and value networks with hand-written backpropagation.
 *
 * Networks act on column batches: an input matrix has one observation per
 * column. The last layer is linear; its raw output feeds one of three heads:
 *   - categorical: 3 logits, softmax probabilities;
 *   - gaussian2d: 2 mean pre-activations and 2 scale pre-activations,
 *     mu = (1 - eps) tanh(z), sigma = 0.2 + 0.4 (eps + (1 - 2 eps) sigmoid(z));
 *   - scalar value.
 * The eps margins keep the open intervals (-1, 1) and (0.2, 0.6) strict even
 * when tanh and sigmoid saturate in floating point.
 */

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "crllk/errors.hpp"
#include "crllk/rng.hpp"
#include "crllk/vehicle.hpp"

namespace crllk {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Activation { kIdentity, kTanh };
enum class HeadKind { kCategorical, kGaussian2d, kScalarValue };

inline constexpr int kNumDiscreteActions = 3;
inline constexpr double kMeanMargin = 1e-6;
inline constexpr double kSigmaMargin = 1e-6;
inline constexpr double kSigmaMin = 0.2;
inline constexpr double kSigmaSpan = 0.4;

inline const char* to_string(HeadKind h) {
  switch (h) {
    case HeadKind::kCategorical: return "categorical";
    case HeadKind::kGaussian2d: return "gaussian2d";
    default: return "scalar_value";
  }
}

inline HeadKind head_kind_from_string(const std::string& s) {
  if (s == "categorical") return HeadKind::kCategorical;
  if (s == "gaussian2d") return HeadKind::kGaussian2d;
  if (s == "scalar_value") return HeadKind::kScalarValue;
  throw ArgumentError("unknown head kind '" + s + "'");
}

inline int head_output_size(HeadKind h) {
  switch (h) {
    case HeadKind::kCategorical: return kNumDiscreteActions;
    case HeadKind::kGaussian2d: return 4;
    default: return 1;
  }
}

struct Layer {
  MatrixXd weight;  // out x in
  VectorXd bias;
  Activation activation = Activation::kIdentity;
};

struct NetParams {
  std::vector<Layer> layers;
  HeadKind head = HeadKind::kScalarValue;
  /// Seeds that produced these parameters, oldest first.
  std::vector<std::uint64_t> seed_lineage;

  int input_size() const { return layers.empty() ? 0 : static_cast<int>(layers.front().weight.cols()); }
  int output_size() const { return layers.empty() ? 0 : static_cast<int>(layers.back().weight.rows()); }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
  }

  void validate() const {
    if (layers.empty()) throw ShapeError("network has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      if (l.bias.size() != l.weight.rows())
        throw ShapeError("layer " + std::to_string(i) + ": bias size does not match weight rows");
      if (i > 0 && l.weight.cols() != layers[i - 1].weight.rows())
        throw ShapeError("layer " + std::to_string(i) + ": input size does not match previous output");
      if (!l.weight.allFinite() || !l.bias.allFinite())
        throw NumericError("layer " + std::to_string(i) + ": non-finite parameters");
    }
    if (output_size() != head_output_size(head)) throw ShapeError("output layer does not match head kind");
  }
};

/// Gradient with the same layout as NetParams.
struct ParamGrads {
  std::vector<MatrixXd> weight;
  std::vector<VectorXd> bias;

  static ParamGrads zeros_like(const NetParams& p) {
    ParamGrads g;
    for (const auto& l : p.layers) {
      g.weight.push_back(MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
      g.bias.push_back(VectorXd::Zero(l.bias.size()));
    }
    return g;
  }

  ParamGrads& operator+=(const ParamGrads& o) {
    for (std::size_t i = 0; i < weight.size(); ++i) {
      weight[i] += o.weight[i];
      bias[i] += o.bias[i];
    }
    return *this;
  }

  bool all_finite() const {
    for (std::size_t i = 0; i < weight.size(); ++i)
      if (!weight[i].allFinite() || !bias[i].allFinite()) return false;
    return true;
  }
};

inline VectorXd flatten(const NetParams& p) {
  VectorXd v(p.parameter_count());
  Eigen::Index k = 0;
  for (const auto& l : p.layers) {
    v.segment(k, l.weight.size()) = l.weight.reshaped();
    k += l.weight.size();
    v.segment(k, l.bias.size()) = l.bias;
    k += l.bias.size();
  }
  return v;
}

inline VectorXd flatten(const ParamGrads& g) {
  Eigen::Index n = 0;
  for (std::size_t i = 0; i < g.weight.size(); ++i) n += g.weight[i].size() + g.bias[i].size();
  VectorXd v(n);
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < g.weight.size(); ++i) {
    v.segment(k, g.weight[i].size()) = g.weight[i].reshaped();
    k += g.weight[i].size();
    v.segment(k, g.bias[i].size()) = g.bias[i];
    k += g.bias[i].size();
  }
  return v;
}

inline void unflatten(const VectorXd& v, NetParams& p) {
  if (v.size() != p.parameter_count()) throw ShapeError("parameter vector size mismatch");
  Eigen::Index k = 0;
  for (auto& l : p.layers) {
    l.weight.reshaped() = v.segment(k, l.weight.size());
    k += l.weight.size();
    l.bias = v.segment(k, l.bias.size());
    k += l.bias.size();
  }
}

namespace detail {

/// Rows x cols matrix with orthonormal rows or columns, scaled by `gain`.
inline MatrixXd orthogonal(Eigen::Index rows, Eigen::Index cols, double gain, Rng& rng) {
  const Eigen::Index n = std::max(rows, cols);
  const Eigen::Index m = std::min(rows, cols);
  MatrixXd a(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i) a(i, j) = rng.normal();
  Eigen::HouseholderQR<MatrixXd> qr(a);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, m);
  // Sign fix so the factorization is unique.
  const MatrixXd r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < m; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  MatrixXd w = rows >= cols ? q : MatrixXd(q.transpose());
  return gain * w;
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

/// Tanh MLP with orthogonal initialization (hidden gain sqrt 2); the output
/// layer is scaled by `output_gain`. Biases start at zero.
inline NetParams make_network(int input_size, const std::vector<int>& hidden, HeadKind head, std::uint64_t seed,
                              double output_gain) {
  if (input_size <= 0) throw ShapeError("input size must be positive");
  Rng rng(seed);
  NetParams p;
  p.head = head;
  p.seed_lineage = {seed};
  int in = input_size;
  for (int h : hidden) {
    if (h <= 0) throw ShapeError("hidden layer sizes must be positive");
    p.layers.push_back({detail::orthogonal(h, in, std::numbers::sqrt2, rng), VectorXd::Zero(h), Activation::kTanh});
    in = h;
  }
  const int out = head_output_size(head);
  p.layers.push_back({detail::orthogonal(out, in, output_gain, rng), VectorXd::Zero(out), Activation::kIdentity});
  return p;
}

struct ForwardCache {
  /// activations[0] is the input batch; activations[l + 1] the output of layer l.
  std::vector<MatrixXd> activations;

  const MatrixXd& output() const { return activations.back(); }
};

inline ForwardCache forward(const NetParams& p, const MatrixXd& inputs) {
  if (inputs.rows() != p.input_size())
    throw ShapeError("input has " + std::to_string(inputs.rows()) + " rows, network expects " +
                     std::to_string(p.input_size()));
  ForwardCache cache;
  cache.activations.reserve(p.layers.size() + 1);
  cache.activations.push_back(inputs);
  for (const auto& l : p.layers) {
    MatrixXd z = l.weight * cache.activations.back();
    z.colwise() += l.bias;
    if (l.activation == Activation::kTanh) z = z.array().tanh().matrix();
    cache.activations.push_back(std::move(z));
  }
  return cache;
}

/// Gradients of sum_over_batch <upstream, raw_output> w.r.t. all parameters.
inline ParamGrads backward(const NetParams& p, const ForwardCache& cache, const MatrixXd& upstream) {
  if (upstream.rows() != p.output_size() || upstream.cols() != cache.output().cols())
    throw ShapeError("upstream gradient shape does not match network output");
  ParamGrads g;
  g.weight.resize(p.layers.size());
  g.bias.resize(p.layers.size());
  MatrixXd delta = upstream;
  for (std::size_t li = p.layers.size(); li-- > 0;) {
    const Layer& l = p.layers[li];
    if (l.activation == Activation::kTanh) {
      const auto& a = cache.activations[li + 1];
      delta = (delta.array() * (1.0 - a.array().square())).matrix();
    }
    g.weight[li] = delta * cache.activations[li].transpose();
    g.bias[li] = delta.rowwise().sum();
    if (li > 0) delta = l.weight.transpose() * delta;
  }
  return g;
}

inline MatrixXd as_column(std::span<const double> obs) {
  MatrixXd x(static_cast<Eigen::Index>(obs.size()), 1);
  for (std::size_t i = 0; i < obs.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = obs[i];
  return x;
}

// ---------------------------------------------------------------------------
// Distribution heads

struct CategoricalDist {
  std::array<double, kNumDiscreteActions> logits{};
  std::array<double, kNumDiscreteActions> probs{};
  std::array<double, kNumDiscreteActions> log_probs{};
};

struct GaussianDist {
  std::array<double, 2> mu{};
  std::array<double, 2> sigma{};
};

using ActionDistribution = std::variant<CategoricalDist, GaussianDist>;

inline CategoricalDist categorical_from_logits(const double* z) {
  CategoricalDist d;
  double m = z[0];
  for (int i = 1; i < kNumDiscreteActions; ++i) m = std::max(m, z[i]);
  double sum = 0.0;
  for (int i = 0; i < kNumDiscreteActions; ++i) {
    d.logits[i] = z[i];
    sum += std::exp(z[i] - m);
  }
  const double log_norm = m + std::log(sum);
  for (int i = 0; i < kNumDiscreteActions; ++i) {
    d.log_probs[i] = z[i] - log_norm;
    d.probs[i] = std::exp(d.log_probs[i]);
  }
  return d;
}

inline GaussianDist gaussian_from_raw(const double* z) {
  GaussianDist d;
  for (int i = 0; i < 2; ++i) {
    d.mu[i] = (1.0 - kMeanMargin) * std::tanh(z[i]);
    d.sigma[i] = kSigmaMin + kSigmaSpan * (kSigmaMargin + (1.0 - 2.0 * kSigmaMargin) * detail::sigmoid(z[2 + i]));
  }
  return d;
}

inline ActionDistribution distribution_from_raw(HeadKind head, const double* z) {
  if (head == HeadKind::kCategorical) return categorical_from_logits(z);
  if (head == HeadKind::kGaussian2d) return gaussian_from_raw(z);
  throw ArgumentError("value network has no action distribution");
}

inline ActionDistribution forward_policy(const NetParams& p, std::span<const double> obs) {
  const ForwardCache c = forward(p, as_column(obs));
  return distribution_from_raw(p.head, c.output().data());
}

inline double forward_value(const NetParams& p, std::span<const double> obs) {
  if (p.head != HeadKind::kScalarValue) throw ArgumentError("forward_value needs a scalar_value network");
  return forward(p, as_column(obs)).output()(0, 0);
}

/// Action as seen by the log-density: a discrete index or the raw
/// (pre-clamp) Gaussian sample.
struct ActionSample {
  Action action;
  std::array<double, 2> raw{};
  int index = 0;
  double log_prob = 0.0;
};

inline double gaussian_log_prob(const GaussianDist& d, const std::array<double, 2>& x) {
  double lp = -std::log(2.0 * std::numbers::pi);
  for (int i = 0; i < 2; ++i) {
    const double u = (x[i] - d.mu[i]) / d.sigma[i];
    lp -= std::log(d.sigma[i]) + 0.5 * u * u;
  }
  return lp;
}

inline ActionSample sample_and_logprob(const ActionDistribution& dist, Rng& rng) {
  ActionSample s;
  if (const auto* c = std::get_if<CategoricalDist>(&dist)) {
    const double u = rng.uniform();
    double acc = 0.0;
    int idx = kNumDiscreteActions - 1;
    for (int i = 0; i < kNumDiscreteActions; ++i) {
      acc += c->probs[i];
      if (u < acc) {
        idx = i;
        break;
      }
    }
    while (c->probs[idx] == 0.0 && idx > 0) --idx;
    s.index = idx;
    s.action = DiscreteAction{idx};
    s.log_prob = c->log_probs[idx];
    return s;
  }
  const auto& g = std::get<GaussianDist>(dist);
  for (int i = 0; i < 2; ++i) s.raw[i] = g.mu[i] + g.sigma[i] * rng.normal();
  s.action = ContinuousAction{std::clamp(s.raw[0], -1.0, 1.0), std::clamp(s.raw[1], -1.0, 1.0)};
  s.log_prob = gaussian_log_prob(g, s.raw);
  return s;
}

/// Argmax for categorical, the mean for Gaussian.
inline ActionSample greedy_action(const ActionDistribution& dist) {
  ActionSample s;
  if (const auto* c = std::get_if<CategoricalDist>(&dist)) {
    s.index = static_cast<int>(std::max_element(c->probs.begin(), c->probs.end()) - c->probs.begin());
    s.action = DiscreteAction{s.index};
    s.log_prob = c->log_probs[s.index];
    return s;
  }
  const auto& g = std::get<GaussianDist>(dist);
  s.raw = g.mu;
  s.action = ContinuousAction{g.mu[0], g.mu[1]};
  s.log_prob = gaussian_log_prob(g, s.raw);
  return s;
}

inline double log_prob(const ActionDistribution& dist, const ActionSample& a) {
  if (const auto* c = std::get_if<CategoricalDist>(&dist)) return c->log_probs[a.index];
  return gaussian_log_prob(std::get<GaussianDist>(dist), a.raw);
}

inline double entropy(const ActionDistribution& dist) {
  if (const auto* c = std::get_if<CategoricalDist>(&dist)) {
    double h = 0.0;
    for (int i = 0; i < kNumDiscreteActions; ++i) h -= c->probs[i] * c->log_probs[i];
    return h;
  }
  const auto& g = std::get<GaussianDist>(dist);
  return 1.0 + std::log(2.0 * std::numbers::pi) + std::log(g.sigma[0]) + std::log(g.sigma[1]);
}

/// d log pi(a) / d raw_output, written into `out` (head_output_size entries).
inline void log_prob_grad_raw(HeadKind head, const double* z, const ActionSample& a, double* out) {
  if (head == HeadKind::kCategorical) {
    const CategoricalDist d = categorical_from_logits(z);
    for (int i = 0; i < kNumDiscreteActions; ++i) out[i] = (i == a.index ? 1.0 : 0.0) - d.probs[i];
    return;
  }
  const GaussianDist d = gaussian_from_raw(z);
  for (int i = 0; i < 2; ++i) {
    const double t = std::tanh(z[i]);
    const double s = detail::sigmoid(z[2 + i]);
    const double diff = a.raw[i] - d.mu[i];
    const double var = d.sigma[i] * d.sigma[i];
    const double dlp_dmu = diff / var;
    const double dlp_dsigma = -1.0 / d.sigma[i] + diff * diff / (var * d.sigma[i]);
    out[i] = dlp_dmu * (1.0 - kMeanMargin) * (1.0 - t * t);
    out[2 + i] = dlp_dsigma * kSigmaSpan * (1.0 - 2.0 * kSigmaMargin) * s * (1.0 - s);
  }
}

/// d entropy / d raw_output.
inline void entropy_grad_raw(HeadKind head, const double* z, double* out) {
  if (head == HeadKind::kCategorical) {
    const CategoricalDist d = categorical_from_logits(z);
    double h = 0.0;
    for (int i = 0; i < kNumDiscreteActions; ++i) h -= d.probs[i] * d.log_probs[i];
    for (int i = 0; i < kNumDiscreteActions; ++i) out[i] = -d.probs[i] * (d.log_probs[i] + h);
    return;
  }
  const GaussianDist d = gaussian_from_raw(z);
  for (int i = 0; i < 2; ++i) {
    const double s = detail::sigmoid(z[2 + i]);
    out[i] = 0.0;
    out[2 + i] = (1.0 / d.sigma[i]) * kSigmaSpan * (1.0 - 2.0 * kSigmaMargin) * s * (1.0 - s);
  }
}

// ---------------------------------------------------------------------------
// Checkpoint files

inline nlohmann::json to_json(const NetParams& p) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : p.layers) {
    std::vector<double> w(static_cast<std::size_t>(l.weight.size()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
        w[static_cast<std::size_t>(r * l.weight.cols() + c)] = l.weight(r, c);
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back({{"rows", l.weight.rows()},
                      {"cols", l.weight.cols()},
                      {"activation", l.activation == Activation::kTanh ? "tanh" : "identity"},
                      {"weight", w},
                      {"bias", b}});
  }
  return {{"format", "crllk-net"},
          {"version", 1},
          {"head", to_string(p.head)},
          {"seed_lineage", p.seed_lineage},
          {"layers", layers}};
}

inline NetParams net_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "crllk-net") throw ParseError("not a network checkpoint", 0);
    if (j.at("version").get<int>() != 1) throw ParseError("unsupported checkpoint version", 0);
    NetParams p;
    p.head = head_kind_from_string(j.at("head").get<std::string>());
    p.seed_lineage = j.at("seed_lineage").get<std::vector<std::uint64_t>>();
    for (const auto& lj : j.at("layers")) {
      const auto rows = lj.at("rows").get<Eigen::Index>();
      const auto cols = lj.at("cols").get<Eigen::Index>();
      const auto w = lj.at("weight").get<std::vector<double>>();
      const auto b = lj.at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows)
        throw ShapeError("checkpoint layer arrays do not match declared shape");
      Layer l;
      l.weight.resize(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) l.weight(r, c) = w[static_cast<std::size_t>(r * cols + c)];
      l.bias = Eigen::Map<const VectorXd>(b.data(), rows);
      const std::string act = lj.at("activation").get<std::string>();
      if (act == "tanh") {
        l.activation = Activation::kTanh;
      } else if (act == "identity") {
        l.activation = Activation::kIdentity;
      } else {
        throw ParseError("unknown activation '" + act + "'", 0);
      }
      p.layers.push_back(std::move(l));
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed network checkpoint: ") + e.what(), 0);
  }
}

}  // namespace crllk
