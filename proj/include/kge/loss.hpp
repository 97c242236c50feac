#pragma once

// The unified smoothed negative-sampling loss and its special cases
// (NS, SANS, TANS). Noise weights are computed from current scores and then
// frozen: no gradient flows through them.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kge/errors.hpp"
#include "kge/scoring.hpp"
#include "kge/smoothing.hpp"

namespace kge {

enum class LossFamily { NS, SANS, TANS, Unified };

inline const char* loss_family_name(LossFamily f) {
  switch (f) {
    case LossFamily::NS: return "ns";
    case LossFamily::SANS: return "sans";
    case LossFamily::TANS: return "tans";
    case LossFamily::Unified: return "unified";
  }
  return "?";
}

struct LossConfig {
  LossFamily family = LossFamily::NS;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double eta = 1.0;
  double tau = 0.0;  // margin
  int nu = 1;        // negatives per positive
  SubsamplingAssumption assumption = SubsamplingAssumption::None;

  // Family selectors zero out the temperatures they do not use.
  double effective_alpha() const {
    return family == LossFamily::Unified ? alpha : 0.0;
  }
  double effective_beta() const { return family == LossFamily::NS ? 0.0 : beta; }
  double effective_gamma() const {
    return (family == LossFamily::NS || family == LossFamily::SANS) ? 0.0 : gamma;
  }
  double effective_eta() const { return family == LossFamily::Unified ? eta : 1.0; }
};

struct TrainingExample {
  Query query;
  EntityId answer = 0;
  std::vector<EntityId> negatives;
  double a = 1.0;  // subsampling weight, positive term
  double b = 1.0;  // subsampling weight, negative term
};

// log(sigmoid(u)) = -softplus(-u), stable for large |u|.
inline double log_sigmoid(double u) {
  return u >= 0 ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u));
}

inline double sigmoid(double u) {
  return u >= 0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
}

// Softmax of beta * scores with max subtraction; sums to 1.
inline std::vector<double> sans_weights(std::span<const double> neg_scores,
                                        double beta) {
  if (neg_scores.empty()) throw ContractError("sans_weights needs at least one score");
  double mx = beta * neg_scores[0];
  for (double s : neg_scores) mx = std::max(mx, beta * s);
  std::vector<double> w(neg_scores.size());
  double sum = 0;
  for (std::size_t i = 0; i < neg_scores.size(); ++i) {
    w[i] = std::exp(beta * neg_scores[i] - mx);
    sum += w[i];
  }
  for (auto& v : w) v /= sum;
  return w;
}

// In-batch query weights: B * softmax(gamma * positive scores), so the batch
// mean is exactly 1 and gamma = 0 gives all ones.
inline std::vector<double> tans_query_weights(std::span<const double> batch_pos_scores,
                                              double gamma) {
  if (batch_pos_scores.empty()) throw ContractError("tans_query_weights needs a batch");
  auto w = sans_weights(batch_pos_scores, gamma);
  const double scale = static_cast<double>(w.size());
  for (auto& v : w) v *= scale;
  return w;
}

struct GradientMap {
  std::unordered_map<EntityId, std::vector<double>> entity;
  std::unordered_map<RelationId, std::vector<double>> relation;

  void accumulate(const ScoreGradient& g, double coeff) {
    for (const auto& [id, vec] : g.entity) {
      auto& dst = entity[id];
      if (dst.empty()) dst.assign(vec.size(), 0.0);
      for (std::size_t i = 0; i < vec.size(); ++i) dst[i] += coeff * vec[i];
    }
    for (const auto& [id, vec] : g.relation) {
      auto& dst = relation[id];
      if (dst.empty()) dst.assign(vec.size(), 0.0);
      for (std::size_t i = 0; i < vec.size(); ++i) dst[i] += coeff * vec[i];
    }
  }
};

struct LossResult {
  double loss = 0;
  GradientMap grads;
};

namespace detail {

inline Triple completion(const Query& q, EntityId candidate) {
  return q.direction == Direction::TailQuery
             ? Triple{q.anchor, q.relation, candidate}
             : Triple{candidate, q.relation, q.anchor};
}

struct FrozenWeights {
  std::vector<double> query_w;               // per example
  std::vector<std::vector<double>> noise_w;  // per example, per negative
};

// Noise weights at the given parameters; these are constants of the loss.
inline FrozenWeights freeze_weights(std::span<const TrainingExample> batch,
                                    const ModelParams& params,
                                    const LossConfig& cfg) {
  FrozenWeights fw;
  std::vector<double> pos_scores(batch.size());
  fw.noise_w.resize(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& ex = batch[j];
    if (ex.negatives.empty()) throw ContractError("example has no negatives");
    pos_scores[j] = score(params, completion(ex.query, ex.answer));
    std::vector<double> ns(ex.negatives.size());
    for (std::size_t i = 0; i < ex.negatives.size(); ++i) {
      ns[i] = score(params, completion(ex.query, ex.negatives[i]));
    }
    fw.noise_w[j] = sans_weights(ns, cfg.effective_beta());
  }
  fw.query_w = tans_query_weights(pos_scores, cfg.effective_gamma());
  return fw;
}

// Loss value with the noise weights held fixed; used both by unified_loss
// and by the finite-difference gradient check.
inline double frozen_loss(std::span<const TrainingExample> batch,
                          const ModelParams& params, const LossConfig& cfg,
                          const FrozenWeights& fw, GradientMap* grads) {
  const double eta = cfg.effective_eta();
  const double tau = cfg.tau;
  double total = 0;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& ex = batch[j];
    const double w = fw.query_w[j];

    Triple pos = completion(ex.query, ex.answer);
    double s_pos = score(params, pos);
    if (!std::isfinite(s_pos)) {
      throw NumericError("non-finite positive score for query anchor " +
                         std::to_string(ex.query.anchor));
    }
    total -= inv_b * w * ex.a * log_sigmoid(s_pos + tau);
    if (grads) {
      // d/ds log(sigmoid(s+tau)) = sigmoid(-(s+tau))
      double coeff = -inv_b * w * ex.a * sigmoid(-(s_pos + tau));
      grads->accumulate(score_gradient(params, pos), coeff);
    }

    for (std::size_t i = 0; i < ex.negatives.size(); ++i) {
      Triple neg = completion(ex.query, ex.negatives[i]);
      double s_neg = score(params, neg);
      if (!std::isfinite(s_neg)) {
        throw NumericError("non-finite negative score for candidate " +
                           std::to_string(ex.negatives[i]));
      }
      double p = fw.noise_w[j][i];
      total -= inv_b * w * eta * ex.b * p * log_sigmoid(-s_neg - tau);
      if (grads) {
        double coeff = inv_b * w * eta * ex.b * p * sigmoid(s_neg + tau);
        grads->accumulate(score_gradient(params, neg), coeff);
      }
    }
  }
  return total;
}

}  // namespace detail

// loss = -(1/B) sum_j w_j [ a_j log sig(s+ + tau)
//                           + eta sum_i b_j p_ji log sig(-s- - tau) ]
// with w and p computed from the current scores and frozen for the gradient.
inline LossResult unified_loss(std::span<const TrainingExample> batch,
                               const ModelParams& params, const LossConfig& cfg) {
  if (batch.empty()) throw ContractError("unified_loss: empty batch");
  auto fw = detail::freeze_weights(batch, params, cfg);
  LossResult res;
  res.loss = detail::frozen_loss(batch, params, cfg, fw, &res.grads);
  return res;
}

// Max relative error between analytic gradients and central finite
// differences of the frozen-weight loss, over every touched coordinate.
inline double loss_gradient_check(ModelParams params, const LossConfig& cfg,
                                  std::span<const TrainingExample> batch,
                                  double step = 1e-6) {
  auto fw = detail::freeze_weights(batch, params, cfg);
  GradientMap analytic;
  detail::frozen_loss(batch, params, cfg, fw, &analytic);

  double max_rel = 0;
  auto check_coord = [&](double* slot, double analytic_g) {
    const double saved = *slot;
    *slot = saved + step;
    double up = detail::frozen_loss(batch, params, cfg, fw, nullptr);
    *slot = saved - step;
    double down = detail::frozen_loss(batch, params, cfg, fw, nullptr);
    *slot = saved;
    double numeric = (up - down) / (2 * step);
    // Floor keeps finite-difference cancellation noise at saturated-sigmoid
    // coordinates (gradients ~1e-30) from dominating the relative error.
    double denom = std::max({std::abs(analytic_g), std::abs(numeric), 1e-3});
    max_rel = std::max(max_rel, std::abs(analytic_g - numeric) / denom);
  };

  for (const auto& [id, vec] : analytic.entity) {
    double* row = params.entity(id);
    for (std::size_t i = 0; i < vec.size(); ++i) check_coord(row + i, vec[i]);
  }
  for (const auto& [id, vec] : analytic.relation) {
    double* row = params.relation(id);
    for (std::size_t i = 0; i < vec.size(); ++i) check_coord(row + i, vec[i]);
  }
  return max_rel;
}

}  // namespace kge
