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

// Shared finite-difference machinery for the gradient tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "crllk/policy.hpp"
#include "crllk/rng.hpp"

namespace crllk::testing {

inline Eigen::VectorXd random_unit(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = rng.normal();
  return d / d.norm();
}

/// Net with all weights and biases drawn from N(0, scale^2).
inline NetParams random_net(int in, const std::vector<int>& hidden, HeadKind head, Rng& rng, double scale = 0.5) {
  NetParams p = make_network(in, hidden, head, rng.next_u64(), 1.0);
  for (auto& l : p.layers) {
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = scale * rng.normal();
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = scale * rng.normal();
  }
  return p;
}

inline Eigen::MatrixXd random_obs(int in, int n, Rng& rng) {
  Eigen::MatrixXd x(in, n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  return x;
}

struct DirectionalCheck {
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

/// Compares g . d against the central difference of f along d with step h.
/// The relative error uses max(|a|, |n|) with an absolute floor of 1e-8 so
/// that two vanishing derivatives do not count as a mismatch.
inline DirectionalCheck check_direction(const NetParams& p, const Eigen::VectorXd& grad, const Eigen::VectorXd& d,
                                        const std::function<double(const NetParams&)>& f, double h = 1e-5) {
  const Eigen::VectorXd theta = flatten(p);
  NetParams plus = p, minus = p;
  unflatten(theta + h * d, plus);
  unflatten(theta - h * d, minus);
  DirectionalCheck c;
  c.analytic = grad.dot(d);
  c.numeric = (f(plus) - f(minus)) / (2.0 * h);
  c.rel_error = std::abs(c.analytic - c.numeric) / std::max({std::abs(c.analytic), std::abs(c.numeric), 1e-8});
  return c;
}

}  // namespace crllk::testing
