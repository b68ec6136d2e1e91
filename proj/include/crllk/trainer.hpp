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
 * One-timescale PPO-Lagrangian learner.
 *
 * Each iteration collects one batch, estimates the undiscounted constraint
 * costs from it, runs the clipped-surrogate policy update and the critic
 * regression over the multiplier-weighted reward stream, and then applies the
 * projected multiplier step using the estimates from that same batch.
 */

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crllk/buffer.hpp"
#include "crllk/errors.hpp"
#include "crllk/optim.hpp"
#include "crllk/policy.hpp"
#include "crllk/rollout.hpp"

namespace crllk {

enum class TrainMode { kCrllkDiscrete, kCrllkContinuous, kFixedDiscrete, kFixedContinuous, kRobustBaseline };

inline const char* to_string(TrainMode m) {
  switch (m) {
    case TrainMode::kCrllkDiscrete: return "crllk_discrete";
    case TrainMode::kCrllkContinuous: return "crllk_continuous";
    case TrainMode::kFixedDiscrete: return "fixed_discrete";
    case TrainMode::kFixedContinuous: return "fixed_continuous";
    default: return "robust_baseline";
  }
}

inline TrainMode train_mode_from_string(const std::string& s) {
  for (TrainMode m : {TrainMode::kCrllkDiscrete, TrainMode::kCrllkContinuous, TrainMode::kFixedDiscrete,
                      TrainMode::kFixedContinuous, TrainMode::kRobustBaseline})
    if (s == to_string(m)) return m;
  throw ArgumentError("unknown mode '" + s + "'");
}

/// The robust baseline is the fixed-weight reward on the three-action space.
inline bool is_discrete(TrainMode m) {
  return m == TrainMode::kCrllkDiscrete || m == TrainMode::kFixedDiscrete || m == TrainMode::kRobustBaseline;
}
inline bool is_adaptive(TrainMode m) { return m == TrainMode::kCrllkDiscrete || m == TrainMode::kCrllkContinuous; }
inline HeadKind policy_head(TrainMode m) { return is_discrete(m) ? HeadKind::kCategorical : HeadKind::kGaussian2d; }

struct CostGains {
  double reward = 10.0;
  double lane = 100.0;
  double collision = 40.0;
  double lane_switch = 40.0;
};

enum class LambdaSign { kDualAscent, kAsPrinted };

inline const char* to_string(LambdaSign s) { return s == LambdaSign::kDualAscent ? "dual_ascent" : "as_printed"; }

inline LambdaSign lambda_sign_from_string(const std::string& s) {
  if (s == "dual_ascent") return LambdaSign::kDualAscent;
  if (s == "as_printed") return LambdaSign::kAsPrinted;
  throw ArgumentError("unknown lambda_sign '" + s + "'");
}

struct LagrangeState {
  double lambda1 = 1.0;  // lane deviation
  double lambda2 = 1.0;  // collision
  double lambda3 = 1.0;  // lane switching
  double alpha1 = 0.5;   // decimeters
  double alpha2 = 0.02;  // collisions per episode
  double alpha3 = 0.1;   // switches per episode
  double eta1 = 2e-5;
  double eta2 = 2e-5;    // also drives lambda3
  double eta3_policy = 2e-5;
  double eta4_critic = 1e-5;
};

/// g_r r - g_lane l1 c_lane - g_coll l2 c_coll - g_swt l3 c_swt. Fixed modes
/// use unit multipliers; discrete modes drop the switching term.
inline double modified_reward(double r, double c_lane, double c_coll, double c_swt, const LagrangeState& lg,
                              TrainMode mode, const CostGains& gains = {}) {
  const bool adaptive = is_adaptive(mode);
  const double l1 = adaptive ? lg.lambda1 : 1.0;
  const double l2 = adaptive ? lg.lambda2 : 1.0;
  const double out = gains.reward * r - gains.lane * (l1 * c_lane) - gains.collision * (l2 * c_coll);
  if (is_discrete(mode)) return out;
  const double l3 = adaptive ? lg.lambda3 : 1.0;
  return out - gains.lane_switch * (l3 * c_swt);
}

struct CostEstimates {
  double J_R = 0.0;
  double J_clane = 0.0;
  double J_ccoll = 0.0;
  double J_cswt = 0.0;
  int episodes = 0;
};

/// Undiscounted estimates: J_clane is the mean over episodes of the per-step
/// lane cost average; J_R, J_ccoll, J_cswt are means of per-episode sums.
inline CostEstimates episode_cost_estimates(const TrajectoryBuffer& buffer) {
  if (buffer.episodes.empty()) throw ArgumentError("episode_cost_estimates: buffer holds no episodes");
  CostEstimates e;
  for (const auto& ep : buffer.episodes) {
    if (ep.steps.empty()) throw ArgumentError("episode_cost_estimates: empty episode");
    e.J_R += ep.reward_sum();
    e.J_clane += ep.lane_mean();
    e.J_ccoll += ep.collision_sum();
    e.J_cswt += ep.switch_sum();
  }
  const double n = static_cast<double>(buffer.episodes.size());
  e.J_R /= n;
  e.J_clane /= n;
  e.J_ccoll /= n;
  e.J_cswt /= n;
  e.episodes = static_cast<int>(buffer.episodes.size());
  return e;
}

/// Projected multiplier step. Dual ascent raises a multiplier while its
/// constraint is violated; `kAsPrinted` flips the sign of the step.
inline LagrangeState update_lambdas(const LagrangeState& lg, double J_clane, double J_ccoll, double J_cswt,
                                    LambdaSign sign = LambdaSign::kDualAscent, bool update_switch = true) {
  const double s = sign == LambdaSign::kDualAscent ? 1.0 : -1.0;
  LagrangeState out = lg;
  out.lambda1 = std::max(0.0, lg.lambda1 + s * lg.eta1 * (J_clane - lg.alpha1));
  out.lambda2 = std::max(0.0, lg.lambda2 + s * lg.eta2 * (J_ccoll - lg.alpha2));
  if (update_switch) out.lambda3 = std::max(0.0, lg.lambda3 + s * lg.eta2 * (J_cswt - lg.alpha3));
  return out;
}

struct AdvantageResult {
  std::vector<double> modified_rewards;
  std::vector<double> advantages;
  std::vector<double> targets;
};

/// GAE over the modified-reward stream, flattened in buffer order.
inline AdvantageResult compute_advantages(const TrajectoryBuffer& buffer, const LagrangeState& lg, TrainMode mode,
                                          const CostGains& gains, double gamma, double gae_lambda) {
  AdvantageResult res;
  const std::size_t n = buffer.total_steps();
  res.modified_rewards.resize(n);
  res.advantages.resize(n);
  res.targets.resize(n);
  std::size_t offset = 0;
  for (const auto& ep : buffer.episodes) {
    const std::size_t len = ep.steps.size();
    double next_value = ep.bootstrap_value;
    double running = 0.0;
    for (std::size_t k = len; k-- > 0;) {
      const StepRecord& s = ep.steps[k];
      const double r = modified_reward(s.reward, s.c_lane, s.c_coll, s.c_swt, lg, mode, gains);
      const double delta = r + gamma * next_value - s.value_old;
      running = delta + gamma * gae_lambda * running;
      res.modified_rewards[offset + k] = r;
      res.advantages[offset + k] = running;
      res.targets[offset + k] = running + s.value_old;
      next_value = s.value_old;
    }
    offset += len;
  }
  return res;
}

/// Flat view of a buffer used by the update routines.
struct Batch {
  MatrixXd obs;  // obs_dim x N
  std::vector<ActionSample> actions;
  std::vector<double> log_prob_old;
  std::vector<double> value_old;

  std::size_t size() const { return actions.size(); }

  static Batch from(const TrajectoryBuffer& buffer) {
    Batch b;
    const std::size_t n = buffer.total_steps();
    const std::size_t dim = n ? buffer.episodes.front().steps.front().obs.size() : 0;
    b.obs.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
    b.actions.reserve(n);
    std::size_t k = 0;
    for (const auto& ep : buffer.episodes) {
      for (const auto& s : ep.steps) {
        if (s.obs.size() != dim) throw ShapeError("inconsistent observation sizes in buffer");
        for (std::size_t i = 0; i < dim; ++i)
          b.obs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = s.obs[i];
        b.actions.push_back(s.action);
        b.log_prob_old.push_back(s.log_prob_old);
        b.value_old.push_back(s.value_old);
        ++k;
      }
    }
    return b;
  }

  MatrixXd gather_obs(const std::vector<std::size_t>& idx) const {
    MatrixXd out(obs.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = obs.col(static_cast<Eigen::Index>(idx[j]));
    return out;
  }
};

struct PpoSettings {
  double clip_eps = 0.2;
  int epochs = 4;
  int minibatch = 256;
  double entropy_coef = 0.01;
  bool normalize_advantages = true;
};

struct SurrogateResult {
  ParamGrads grads;  // gradient of the loss (to be minimized)
  double loss = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

/// Loss -mean(min(rho A, clip(rho) A)) - c_ent mean(H) on the given samples.
inline SurrogateResult surrogate_gradient(const NetParams& policy, const MatrixXd& obs,
                                          const std::vector<const ActionSample*>& actions,
                                          const std::vector<double>& log_prob_old, const std::vector<double>& adv,
                                          double clip_eps, double entropy_coef) {
  const ForwardCache cache = forward(policy, obs);
  const MatrixXd& raw = cache.output();
  const auto n = raw.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  MatrixXd upstream(raw.rows(), n);
  SurrogateResult res;
  std::vector<double> g(static_cast<std::size_t>(raw.rows()));
  std::vector<double> ge(static_cast<std::size_t>(raw.rows()));
  for (Eigen::Index j = 0; j < n; ++j) {
    const double* z = raw.col(j).data();
    const ActionSample& a = *actions[static_cast<std::size_t>(j)];
    const ActionDistribution dist = distribution_from_raw(policy.head, z);
    const double lp = log_prob(dist, a);
    const double log_ratio = lp - log_prob_old[static_cast<std::size_t>(j)];
    const double rho = std::exp(log_ratio);
    const double A = adv[static_cast<std::size_t>(j)];
    const double clipped = std::clamp(rho, 1.0 - clip_eps, 1.0 + clip_eps);
    res.loss -= std::min(rho * A, clipped * A) * inv_n;
    const bool clip_active = (A > 0.0 && rho > 1.0 + clip_eps) || (A < 0.0 && rho < 1.0 - clip_eps);
    if (rho > 1.0 + clip_eps || rho < 1.0 - clip_eps) res.clip_fraction += inv_n;
    res.approx_kl += ((rho - 1.0) - log_ratio) * inv_n;
    const double coef = clip_active ? 0.0 : -A * rho * inv_n;
    log_prob_grad_raw(policy.head, z, a, g.data());
    if (entropy_coef != 0.0) {
      res.loss -= entropy_coef * entropy(dist) * inv_n;
      entropy_grad_raw(policy.head, z, ge.data());
    }
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
      double v = coef * g[static_cast<std::size_t>(i)];
      if (entropy_coef != 0.0) v -= entropy_coef * inv_n * ge[static_cast<std::size_t>(i)];
      upstream(i, j) = v;
    }
  }
  res.grads = backward(policy, cache, upstream);
  return res;
}

/// Ascent direction mean(A grad log pi), the unclipped policy gradient.
inline ParamGrads vanilla_policy_gradient(const NetParams& policy, const MatrixXd& obs,
                                          const std::vector<const ActionSample*>& actions,
                                          const std::vector<double>& adv) {
  const ForwardCache cache = forward(policy, obs);
  const MatrixXd& raw = cache.output();
  MatrixXd upstream(raw.rows(), raw.cols());
  std::vector<double> g(static_cast<std::size_t>(raw.rows()));
  const double inv_n = 1.0 / static_cast<double>(raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    log_prob_grad_raw(policy.head, raw.col(j).data(), *actions[static_cast<std::size_t>(j)], g.data());
    for (Eigen::Index i = 0; i < raw.rows(); ++i)
      upstream(i, j) = adv[static_cast<std::size_t>(j)] * inv_n * g[static_cast<std::size_t>(i)];
  }
  return backward(policy, cache, upstream);
}

struct UpdateReport {
  double loss = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  int steps = 0;
};

namespace detail {

inline std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  return idx;
}

inline void normalize(std::vector<double>& v) {
  if (v.empty()) return;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(v.size()));
  for (double& x : v) x = (x - mean) / (sd + 1e-8);
}

inline double max_abs(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace detail

/// Clipped-surrogate epochs over shuffled minibatches. Throws NumericError
/// (leaving `policy` untouched) when a gradient or update is non-finite.
inline UpdateReport ppo_update(NetParams& policy, Optimizer& opt, const Batch& batch,
                               const std::vector<double>& advantages, const PpoSettings& settings, Rng& rng) {
  if (advantages.size() != batch.size()) throw ShapeError("ppo_update: advantages do not match batch");
  UpdateReport rep;
  if (batch.size() == 0) return rep;
  NetParams work = policy;
  VectorXd theta = flatten(work);
  const std::size_t mb = std::max<std::size_t>(1, static_cast<std::size_t>(settings.minibatch));
  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    const std::vector<std::size_t> order = detail::permutation(batch.size(), rng);
    for (std::size_t start = 0; start < order.size(); start += mb) {
      const std::size_t end = std::min(order.size(), start + mb);
      std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(end));
      std::vector<const ActionSample*> acts;
      std::vector<double> lp_old, adv;
      for (std::size_t k : idx) {
        acts.push_back(&batch.actions[k]);
        lp_old.push_back(batch.log_prob_old[k]);
        adv.push_back(advantages[k]);
      }
      if (settings.normalize_advantages) detail::normalize(adv);
      const SurrogateResult s =
          surrogate_gradient(work, batch.gather_obs(idx), acts, lp_old, adv, settings.clip_eps, settings.entropy_coef);
      const VectorXd g = flatten(s.grads);
      if (!std::isfinite(s.loss) || !g.allFinite()) {
        std::ostringstream os;
        os << "ppo_update: non-finite gradient at epoch " << epoch << ", minibatch starting " << start
           << " (loss " << s.loss << ", max |theta| " << detail::max_abs(theta) << ")";
        throw NumericError(os.str());
      }
      opt.step(theta, g);
      if (!theta.allFinite()) throw NumericError("ppo_update: parameters became non-finite");
      unflatten(theta, work);
      rep.loss += s.loss;
      rep.approx_kl += s.approx_kl;
      rep.clip_fraction += s.clip_fraction;
      ++rep.steps;
    }
  }
  if (rep.steps > 0) {
    rep.loss /= rep.steps;
    rep.approx_kl /= rep.steps;
    rep.clip_fraction /= rep.steps;
  }
  policy = std::move(work);
  return rep;
}

/// Minibatch gradient steps on 0.5 * mean((V - target)^2).
inline UpdateReport critic_update(NetParams& critic, Optimizer& opt, const MatrixXd& obs,
                                  const std::vector<double>& targets, int epochs, int minibatch, Rng& rng) {
  if (static_cast<std::size_t>(obs.cols()) != targets.size()) throw ShapeError("critic_update: targets do not match batch");
  UpdateReport rep;
  if (targets.empty()) return rep;
  NetParams work = critic;
  VectorXd theta = flatten(work);
  const std::size_t mb = std::max<std::size_t>(1, static_cast<std::size_t>(minibatch));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const std::vector<std::size_t> order = detail::permutation(targets.size(), rng);
    for (std::size_t start = 0; start < order.size(); start += mb) {
      const std::size_t end = std::min(order.size(), start + mb);
      MatrixXd x(obs.rows(), static_cast<Eigen::Index>(end - start));
      for (std::size_t j = start; j < end; ++j) x.col(static_cast<Eigen::Index>(j - start)) = obs.col(static_cast<Eigen::Index>(order[j]));
      const ForwardCache cache = forward(work, x);
      MatrixXd upstream(1, x.cols());
      const double inv_n = 1.0 / static_cast<double>(x.cols());
      double loss = 0.0;
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double err = cache.output()(0, j) - targets[order[start + static_cast<std::size_t>(j)]];
        loss += 0.5 * err * err * inv_n;
        upstream(0, j) = err * inv_n;
      }
      const VectorXd g = flatten(backward(work, cache, upstream));
      if (!std::isfinite(loss) || !g.allFinite()) {
        std::ostringstream os;
        os << "critic_update: non-finite gradient at epoch " << epoch << " (loss " << loss << ")";
        throw NumericError(os.str());
      }
      opt.step(theta, g);
      if (!theta.allFinite()) throw NumericError("critic_update: parameters became non-finite");
      unflatten(theta, work);
      rep.loss += loss;
      ++rep.steps;
    }
  }
  if (rep.steps > 0) rep.loss /= rep.steps;
  critic = std::move(work);
  return rep;
}

// ---------------------------------------------------------------------------
// Iteration driver

struct TrainSettings {
  TrainMode mode = TrainMode::kCrllkDiscrete;
  CostGains gains;
  LambdaSign lambda_sign = LambdaSign::kDualAscent;
  double gamma = 0.95;
  double gae_lambda = 0.95;
  PpoSettings ppo;
  int critic_epochs = 4;
  int critic_minibatch = 256;
  WorkerSpec workers;
};

struct LearnerState {
  NetParams policy;
  NetParams critic;
  Optimizer policy_opt;
  Optimizer critic_opt;
  LagrangeState lagrange;
  std::uint64_t iteration = 0;
};

struct IterationStats {
  std::uint64_t iter = 0;
  double J_R = 0.0;
  double J_clane = 0.0;
  double J_ccoll = 0.0;
  double J_cswt = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double wall_ms = 0.0;

  nlohmann::ordered_json to_json(bool include_wall_time) const {
    nlohmann::ordered_json j;
    j["iter"] = iter;
    j["J_R"] = J_R;
    j["J_clane"] = J_clane;
    j["J_ccoll"] = J_ccoll;
    j["J_cswt"] = J_cswt;
    j["lambda1"] = lambda1;
    j["lambda2"] = lambda2;
    j["lambda3"] = lambda3;
    j["policy_loss"] = policy_loss;
    j["value_loss"] = value_loss;
    if (include_wall_time) j["wall_ms"] = wall_ms;
    return j;
  }

  static IterationStats from_json(const nlohmann::json& j) {
    IterationStats s;
    s.iter = j.at("iter").get<std::uint64_t>();
    s.J_R = j.at("J_R").get<double>();
    s.J_clane = j.at("J_clane").get<double>();
    s.J_ccoll = j.at("J_ccoll").get<double>();
    s.J_cswt = j.at("J_cswt").get<double>();
    s.lambda1 = j.at("lambda1").get<double>();
    s.lambda2 = j.at("lambda2").get<double>();
    s.lambda3 = j.at("lambda3").get<double>();
    s.policy_loss = j.at("policy_loss").get<double>();
    s.value_loss = j.at("value_loss").get<double>();
    s.wall_ms = j.value("wall_ms", 0.0);
    return s;
  }
};

/// Generator for minibatch shuffling at a given iteration; disjoint from the
/// rollout streams through its domain tag.
inline Rng update_stream(std::uint64_t base_seed, std::uint64_t iteration) {
  return seed_stream(base_seed, 0, iteration, 0x5550444154455253ULL);
}

/// Learner half of an iteration: every update reads the same buffer.
inline IterationStats learn_from(LearnerState& st, const TrainSettings& cfg, const TrajectoryBuffer& buffer) {
  const CostEstimates est = episode_cost_estimates(buffer);
  const AdvantageResult adv = compute_advantages(buffer, st.lagrange, cfg.mode, cfg.gains, cfg.gamma, cfg.gae_lambda);
  const Batch batch = Batch::from(buffer);
  Rng rng = update_stream(cfg.workers.base_seed, st.iteration);

  NetParams policy = st.policy;
  NetParams critic = st.critic;
  Optimizer popt = st.policy_opt;
  Optimizer copt = st.critic_opt;
  const UpdateReport pr = ppo_update(policy, popt, batch, adv.advantages, cfg.ppo, rng);
  const UpdateReport cr = critic_update(critic, copt, batch.obs, adv.targets, cfg.critic_epochs, cfg.critic_minibatch, rng);

  st.policy = std::move(policy);
  st.critic = std::move(critic);
  st.policy_opt = std::move(popt);
  st.critic_opt = std::move(copt);
  if (is_adaptive(cfg.mode)) {
    st.lagrange = update_lambdas(st.lagrange, est.J_clane, est.J_ccoll, est.J_cswt, cfg.lambda_sign,
                                 !is_discrete(cfg.mode));
  }

  IterationStats s;
  s.iter = st.iteration;
  s.J_R = est.J_R;
  s.J_clane = est.J_clane;
  s.J_ccoll = est.J_ccoll;
  s.J_cswt = est.J_cswt;
  s.lambda1 = is_adaptive(cfg.mode) ? st.lagrange.lambda1 : 1.0;
  s.lambda2 = is_adaptive(cfg.mode) ? st.lagrange.lambda2 : 1.0;
  s.lambda3 = is_adaptive(cfg.mode) ? st.lagrange.lambda3 : 1.0;
  s.policy_loss = pr.loss;
  s.value_loss = cr.loss;
  ++st.iteration;
  return s;
}

/// Collect with the rollout farm against the current snapshot, then learn.
/// On NumericError the learner state is left as it was before the call.
inline IterationStats train_iteration(const TrackMap& track, const EnvConfig& env, LearnerState& st,
                                      const TrainSettings& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const CollectReport report = collect(track, env, st.policy, &st.critic, cfg.workers, st.iteration);
  LearnerState next = st;
  IterationStats s = learn_from(next, cfg, report.merged());
  st = std::move(next);
  s.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

/// Fresh learner for a mode: policy and critic with the given hidden sizes,
/// and optimizers at the multiplier-state learning rates.
inline LearnerState make_learner(TrainMode mode, int obs_dim, const std::vector<int>& hidden, std::uint64_t seed,
                                 const LagrangeState& lagrange, OptimizerKind optimizer) {
  LearnerState st;
  st.policy = make_network(obs_dim, hidden, policy_head(mode), splitmix64(seed ^ 0x706f6c696379ULL), 0.01);
  st.critic = make_network(obs_dim, hidden, HeadKind::kScalarValue, splitmix64(seed ^ 0x637269746963ULL), 1.0);
  st.policy.seed_lineage.insert(st.policy.seed_lineage.begin(), seed);
  st.critic.seed_lineage.insert(st.critic.seed_lineage.begin(), seed);
  st.policy_opt = Optimizer(optimizer, lagrange.eta3_policy);
  st.critic_opt = Optimizer(optimizer, lagrange.eta4_critic);
  st.lagrange = lagrange;
  return st;
}

}  // namespace crllk
