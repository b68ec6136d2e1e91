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

#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "crllk/errors.hpp"

namespace crllk {

enum class OptimizerKind { kSgd, kAdam };

inline const char* to_string(OptimizerKind k) { return k == OptimizerKind::kSgd ? "sgd" : "adam"; }

inline OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adam") return OptimizerKind::kAdam;
  throw ArgumentError("unknown optimizer '" + s + "'");
}

/// First-order minimizer over a flat parameter vector.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    if (kind_ == OptimizerKind::kSgd) {
      params -= lr_ * grad;
      return;
    }
    if (m_.size() != grad.size()) {
      m_ = Eigen::VectorXd::Zero(grad.size());
      v_ = Eigen::VectorXd::Zero(grad.size());
      t_ = 0;
    }
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
  }

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return lr_; }
  long steps() const { return t_; }

 private:
  OptimizerKind kind_ = OptimizerKind::kSgd;
  double lr_ = 0.0;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  long t_ = 0;
};

}  // namespace crllk
