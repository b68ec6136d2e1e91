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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "crllk/policy.hpp"
#include "gradcheck.hpp"

namespace crllk {
namespace {

using testing::check_direction;
using testing::random_net;
using testing::random_obs;
using testing::random_unit;

NetParams zero_net(HeadKind head) {
  NetParams p = make_network(10, {16, 16}, head, 1, 1.0);
  for (auto& l : p.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  return p;
}

TEST(ForwardPolicyTest, CategoricalSumsToOne) {
  Rng rng(1);
  for (int n = 0; n < 50; ++n) {
    const NetParams p = random_net(10, {32}, HeadKind::kCategorical, rng, 2.0);
    for (int k = 0; k < 20; ++k) {
      std::vector<double> obs(10);
      for (double& x : obs) x = 3.0 * rng.normal();
      const auto d = std::get<CategoricalDist>(forward_policy(p, obs));
      EXPECT_NEAR(d.probs[0] + d.probs[1] + d.probs[2], 1.0, 1e-12);
    }
  }
}

TEST(ForwardPolicyTest, ZeroWeightsGiveUniform) {
  const auto d = std::get<CategoricalDist>(forward_policy(zero_net(HeadKind::kCategorical), std::vector<double>(10, 0.3)));
  for (double p : d.probs) EXPECT_DOUBLE_EQ(p, 1.0 / 3.0);
}

TEST(ForwardPolicyTest, GaussianBoundsUnderExtremeInputs) {
  Rng rng(2);
  const NetParams p = random_net(10, {32, 32}, HeadKind::kGaussian2d, rng, 5.0);
  for (int k = 0; k < 10000; ++k) {
    std::vector<double> obs(10);
    for (double& x : obs) x = 100.0 * rng.normal();
    const auto g = std::get<GaussianDist>(forward_policy(p, obs));
    for (int i = 0; i < 2; ++i) {
      ASSERT_GT(g.mu[i], -1.0);
      ASSERT_LT(g.mu[i], 1.0);
      ASSERT_GT(g.sigma[i], 0.2);
      ASSERT_LT(g.sigma[i], 0.6);
    }
  }
}

TEST(ForwardPolicyTest, DimensionMismatchIsAShapeError) {
  const NetParams p = make_network(10, {8}, HeadKind::kCategorical, 3, 0.01);
  EXPECT_THROW(forward_policy(p, std::vector<double>(9, 0.0)), ShapeError);
  EXPECT_THROW(forward_value(make_network(10, {8}, HeadKind::kScalarValue, 3, 1.0), std::vector<double>(11, 0.0)),
               ShapeError);
}

TEST(SampleTest, DegenerateCategoricalAlwaysPicksFirst) {
  const double z[3] = {1000.0, -1000.0, -1000.0};
  const ActionDistribution d = categorical_from_logits(z);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const ActionSample s = sample_and_logprob(d, rng);
    ASSERT_EQ(s.index, 0);
    ASSERT_EQ(s.log_prob, 0.0);
  }
}

TEST(SampleTest, GaussianLogProbClosedForm) {
  Rng rng(4);
  for (int k = 0; k < 1000; ++k) {
    const double z[4] = {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    const GaussianDist g = gaussian_from_raw(z);
    const ActionSample s = sample_and_logprob(g, rng);
    double expected = -std::log(2.0 * std::numbers::pi);
    for (int i = 0; i < 2; ++i)
      expected -= std::log(g.sigma[i]) + (s.raw[i] - g.mu[i]) * (s.raw[i] - g.mu[i]) / (2 * g.sigma[i] * g.sigma[i]);
    EXPECT_NEAR(s.log_prob, expected, 1e-12);
    const auto& a = std::get<ContinuousAction>(s.action);
    EXPECT_GE(a.steer, -1.0);
    EXPECT_LE(a.steer, 1.0);
    EXPECT_EQ(a.steer, std::clamp(s.raw[0], -1.0, 1.0));
  }
}

TEST(SampleTest, GaussianMonteCarloMean) {
  const double z[4] = {0.3, -0.2, 0.5, -1.0};
  const GaussianDist g = gaussian_from_raw(z);
  Rng rng(5);
  double m[2] = {0.0, 0.0};
  const int n = 1000000;
  for (int k = 0; k < n; ++k) {
    const ActionSample s = sample_and_logprob(g, rng);
    m[0] += s.raw[0];
    m[1] += s.raw[1];
  }
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(m[i] / n, g.mu[i], 3.0 * g.sigma[i] / 1000.0);
}

TEST(BackwardTest, LogProbGradientVanishesAtTheMean) {
  Rng rng(6);
  for (int k = 0; k < 100; ++k) {
    const double z[4] = {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    const ActionSample a = greedy_action(gaussian_from_raw(z));
    double g[4];
    log_prob_grad_raw(HeadKind::kGaussian2d, z, a, g);
    EXPECT_EQ(g[0], 0.0);
    EXPECT_EQ(g[1], 0.0);
  }
}

TEST(BackwardTest, LinearNetGradientIsOuterProduct) {
  // One identity layer, f = <u, W x + b>: dW = u x^T, db = u.
  NetParams p;
  p.head = HeadKind::kScalarValue;
  Rng rng(7);
  Layer l;
  l.weight = random_obs(1, 5, rng);
  l.bias = Eigen::VectorXd::Constant(1, 0.25);
  l.activation = Activation::kIdentity;
  p.layers = {l};
  const Eigen::MatrixXd x = random_obs(5, 1, rng);
  const Eigen::MatrixXd u = Eigen::MatrixXd::Constant(1, 1, -1.7);
  const ParamGrads g = backward(p, forward(p, x), u);
  const Eigen::MatrixXd expect = u * x.transpose();
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(g.weight[0](0, i), expect(0, i));
  EXPECT_DOUBLE_EQ(g.bias[0][0], -1.7);
}

TEST(BackwardTest, TwoLayerNetMatchesFiniteDifferences) {
  Rng rng(8);
  const NetParams p = random_net(6, {12}, HeadKind::kScalarValue, rng);
  const Eigen::MatrixXd x = random_obs(6, 3, rng);
  const auto f = [&](const NetParams& q) { return forward(q, x).output().sum(); };
  const VectorXd g = flatten(backward(p, forward(p, x), Eigen::MatrixXd::Ones(1, 3)));
  for (int k = 0; k < 100; ++k) {
    const auto c = check_direction(p, g, random_unit(g.size(), rng), f);
    EXPECT_LE(c.rel_error, 1e-4) << c.analytic << " vs " << c.numeric;
  }
}

TEST(ForwardValueTest, ZeroNetIsZeroAndDeterministic) {
  EXPECT_EQ(forward_value(zero_net(HeadKind::kScalarValue), std::vector<double>(10, 1.0)), 0.0);
  Rng rng(9);
  const NetParams p = random_net(10, {32, 32}, HeadKind::kScalarValue, rng);
  for (int k = 0; k < 100000; ++k) {
    std::vector<double> o(10);
    for (double& x : o) x = 10.0 * rng.normal();
    const double v = forward_value(p, o);
    ASSERT_TRUE(std::isfinite(v));
    if (k % 1000 == 0) ASSERT_EQ(v, forward_value(p, o));
  }
}

TEST(CheckpointTest, RoundTripIsBitwise) {
  Rng rng(10);
  for (HeadKind h : {HeadKind::kCategorical, HeadKind::kGaussian2d, HeadKind::kScalarValue}) {
    const NetParams p = random_net(10, {7, 5}, h, rng);
    const NetParams q = net_from_json(nlohmann::json::parse(to_json(p).dump()));
    EXPECT_EQ(flatten(p), flatten(q));
    EXPECT_EQ(q.head, h);
    EXPECT_EQ(q.seed_lineage, p.seed_lineage);
  }
}

TEST(CheckpointTest, CorruptShapeIsRejected) {
  nlohmann::json j = to_json(make_network(4, {3}, HeadKind::kCategorical, 1, 0.01));
  j["layers"][0]["rows"] = 4;
  EXPECT_THROW(net_from_json(j), ShapeError);
}

TEST(MakeNetworkTest, SameSeedSameParameters) {
  EXPECT_EQ(flatten(make_network(10, {64, 64}, HeadKind::kGaussian2d, 21, 0.01)),
            flatten(make_network(10, {64, 64}, HeadKind::kGaussian2d, 21, 0.01)));
  EXPECT_NE(flatten(make_network(10, {64, 64}, HeadKind::kGaussian2d, 21, 0.01)),
            flatten(make_network(10, {64, 64}, HeadKind::kGaussian2d, 22, 0.01)));
}

}  // namespace
}  // namespace crllk
