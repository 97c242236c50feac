#pragma once

// Negative sampling, SGD/Adam updates over sparse gradients, and the
// training loop. Single-threaded and bit-reproducible for a fixed seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kge/data.hpp"
#include "kge/errors.hpp"
#include "kge/eval.hpp"
#include "kge/loss.hpp"
#include "kge/scoring.hpp"
#include "kge/smoothing.hpp"

namespace kge {

enum class Optimizer { SGD, Adam };

struct TrainConfig {
  LossConfig loss;
  ModelKind model = ModelKind::DistMult;
  int dim = 32;
  int batch_size = 256;
  int epochs = 100;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::Adam;
  std::uint64_t seed = 0;
  int eval_every = 0;  // 0 disables periodic validation
  bool negative_filtering = false;
  bool filtered_eval = true;
};

struct EvalPoint {
  int epoch = 0;
  Metrics metrics;
};

struct TrainReport {
  std::vector<double> epoch_loss;  // length = epochs
  std::vector<EvalPoint> validation;
  ModelParams params;
};

// Known train answers per query, for filtered negative sampling.
class TrainAnswerIndex {
 public:
  explicit TrainAnswerIndex(const std::vector<Triple>& train) {
    for (const auto& t : train) {
      answers_[tail_query(t)].insert(t.tail);
      answers_[head_query(t)].insert(t.head);
    }
  }
  const std::unordered_set<EntityId>* answers(const Query& q) const {
    auto it = answers_.find(q);
    return it == answers_.end() ? nullptr : &it->second;
  }

 private:
  std::unordered_map<Query, std::unordered_set<EntityId>, QueryHash> answers_;
};

// nu ids uniform with replacement over the entity vocabulary; with filtering,
// rejection-sample away known train answers of the query (gold included).
inline std::vector<EntityId> sample_negatives(std::mt19937_64& rng,
                                              const Vocab& vocab,
                                              const Query& query, EntityId gold,
                                              int nu, bool filtering,
                                              const TrainAnswerIndex* index) {
  const auto n = static_cast<EntityId>(vocab.num_entities());
  if (n < 2) throw ContractError("need at least two entities to sample negatives");
  const std::unordered_set<EntityId>* known =
      filtering && index ? index->answers(query) : nullptr;
  if (known && known->size() >= static_cast<std::size_t>(n)) {
    throw ContractError("no admissible negatives for query");
  }
  std::uniform_int_distribution<EntityId> dist(0, n - 1);
  std::vector<EntityId> out;
  out.reserve(static_cast<std::size_t>(nu));
  while (out.size() < static_cast<std::size_t>(nu)) {
    EntityId c = dist(rng);
    if (filtering && (c == gold || (known && known->contains(c)))) continue;
    out.push_back(c);
  }
  return out;
}

namespace detail {
template <typename Map>
std::vector<typename Map::key_type> sorted_keys(const Map& m) {
  // Fixed id order keeps updates deterministic regardless of map iteration.
  std::vector<typename Map::key_type> keys;
  keys.reserve(m.size());
  for (const auto& [k, v] : m) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  return keys;
}
}  // namespace detail

// Adam with sparse updates: moments live densely, but only coordinates that
// received gradient this step are advanced (bias correction uses the global
// step count).
class AdamState {
 public:
  explicit AdamState(const ModelParams& params)
      : me_(params.entities.size(), 0.0), ve_(params.entities.size(), 0.0),
        mr_(params.relations.size(), 0.0), vr_(params.relations.size(), 0.0) {}

  void step(ModelParams& params, const GradientMap& grads, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    auto update = [&](double* row, std::size_t offset, std::vector<double>& m,
                      std::vector<double>& v, const std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        double& mi = m[offset + i];
        double& vi = v[offset + i];
        mi = kBeta1 * mi + (1 - kBeta1) * g[i];
        vi = kBeta2 * vi + (1 - kBeta2) * g[i] * g[i];
        row[i] -= lr * (mi / bc1) / (std::sqrt(vi / bc2) + kEps);
      }
    };
    for (EntityId id : detail::sorted_keys(grads.entity)) {
      update(params.entity(id),
             static_cast<std::size_t>(id) * static_cast<std::size_t>(params.dim),
             me_, ve_, grads.entity.at(id));
    }
    for (RelationId id : detail::sorted_keys(grads.relation)) {
      update(params.relation(id),
             static_cast<std::size_t>(id) * static_cast<std::size_t>(params.rel_dim),
             mr_, vr_, grads.relation.at(id));
    }
  }

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

 private:
  std::vector<double> me_, ve_, mr_, vr_;
  std::int64_t t_ = 0;
};

inline void sgd_step(ModelParams& params, const GradientMap& grads, double lr) {
  for (EntityId id : detail::sorted_keys(grads.entity)) {
    const auto& g = grads.entity.at(id);
    double* row = params.entity(id);
    for (std::size_t i = 0; i < g.size(); ++i) row[i] -= lr * g[i];
  }
  for (RelationId id : detail::sorted_keys(grads.relation)) {
    const auto& g = grads.relation.at(id);
    double* row = params.relation(id);
    for (std::size_t i = 0; i < g.size(); ++i) row[i] -= lr * g[i];
  }
}

// Runs shuffled minibatch epochs over the doubled example set (one head- and
// one tail-direction example per train triple). Shuffling and negative
// sampling use separate RNG streams so changing nu does not perturb batch
// order.
inline TrainReport train(const Dataset& ds, const TrainConfig& cfg) {
  if (ds.train.empty()) throw ContractError("train: empty training split");
  if (cfg.epochs < 0 || cfg.batch_size < 1 || cfg.loss.nu < 1) {
    throw ParameterError("invalid training configuration");
  }

  TrainReport report;
  report.params = init_params(ds.vocab, cfg.model, cfg.dim, cfg.seed);
  ModelParams& params = report.params;

  FrequencyTable freq(ds.train);
  const double alpha = cfg.loss.effective_alpha();
  if (alpha != 0.0) freq.sums_for(alpha);  // precompute normalization

  // Base examples in a fixed order; negatives resampled each step.
  struct BaseExample {
    Query query;
    EntityId answer;
    double a, b;
  };
  std::vector<BaseExample> pool;
  pool.reserve(2 * ds.train.size());
  for (const auto& t : ds.train) {
    for (Query q : {tail_query(t), head_query(t)}) {
      EntityId gold = gold_answer(t, q.direction);
      auto w = subsampling_weights(freq, q, gold, cfg.loss.assumption, alpha);
      pool.push_back({q, gold, w.a, w.b});
    }
  }

  TrainAnswerIndex answer_index(ds.train);
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::mt19937_64 sample_rng(cfg.seed ^ 0xc2b2ae3d27d4eb4full);

  AdamState adam(params);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(order.size(),
                                 start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<TrainingExample> batch;
      batch.reserve(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const auto& base = pool[order[k]];
        TrainingExample ex;
        ex.query = base.query;
        ex.answer = base.answer;
        ex.a = base.a;
        ex.b = base.b;
        ex.negatives = sample_negatives(sample_rng, ds.vocab, base.query,
                                        base.answer, cfg.loss.nu,
                                        cfg.negative_filtering, &answer_index);
        batch.push_back(std::move(ex));
      }
      LossResult res = unified_loss(batch, params, cfg.loss);
      if (!std::isfinite(res.loss)) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(n_batches));
      }
      if (cfg.optimizer == Optimizer::Adam) {
        adam.step(params, res.grads, cfg.learning_rate);
      } else {
        sgd_step(params, res.grads, cfg.learning_rate);
      }
      epoch_loss += res.loss;
      ++n_batches;
    }
    report.epoch_loss.push_back(epoch_loss / static_cast<double>(n_batches));

    if (cfg.eval_every > 0 && !ds.valid.empty() &&
        ((epoch + 1) % cfg.eval_every == 0 || epoch + 1 == cfg.epochs)) {
      report.validation.push_back(
          {epoch + 1, evaluate(params, ds, "valid", cfg.filtered_eval)});
    }
  }
  return report;
}

// CSV: epoch, train_loss, valid_mrr, valid_h1, valid_h3, valid_h10. Metric
// columns are empty on epochs without a validation point.
inline void export_curves(const TrainReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  out << "epoch,train_loss,valid_mrr,valid_h1,valid_h3,valid_h10\n";
  std::size_t vi = 0;
  for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
    out << (e + 1) << "," << report.epoch_loss[e];
    if (vi < report.validation.size() &&
        report.validation[vi].epoch == static_cast<int>(e + 1)) {
      const auto& m = report.validation[vi].metrics;
      out << "," << m.mrr << "," << m.hits1 << "," << m.hits3 << "," << m.hits10;
      ++vi;
    } else {
      out << ",,,,";
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace kge
