#pragma once

// Link-prediction ranking with raw/filtered protocols, MRR/Hits@k, and the
// softmax existence distribution over all candidates.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kge/data.hpp"
#include "kge/errors.hpp"
#include "kge/scoring.hpp"

namespace kge {

struct Metrics {
  double mrr = 0;
  double hits1 = 0;
  double hits3 = 0;
  double hits10 = 0;
  std::size_t n_queries = 0;
};

// Known-true answers per query over train + valid + test.
class FilterIndex {
 public:
  explicit FilterIndex(const Dataset& ds) {
    auto add = [this](const std::vector<Triple>& split) {
      for (const auto& t : split) {
        answers_[tail_query(t)].insert(t.tail);
        answers_[head_query(t)].insert(t.head);
      }
    };
    add(ds.train);
    add(ds.valid);
    add(ds.test);
  }

  const std::unordered_set<EntityId>* answers(const Query& q) const {
    auto it = answers_.find(q);
    return it == answers_.end() ? nullptr : &it->second;
  }

 private:
  std::unordered_map<Query, std::unordered_set<EntityId>, QueryHash> answers_;
};

namespace detail {
inline Triple candidate_triple(const Query& q, EntityId candidate) {
  return q.direction == Direction::TailQuery
             ? Triple{q.anchor, q.relation, candidate}
             : Triple{candidate, q.relation, q.anchor};
}
}  // namespace detail

// Pessimistic rank of the gold answer among all |E| completions: ties count
// against the gold. With a filter, known-true answers other than gold are
// removed before counting.
inline int rank(const ModelParams& params, const Query& query, EntityId gold,
                const FilterIndex* filter = nullptr) {
  const double gold_score = score(params, detail::candidate_triple(query, gold));
  const std::unordered_set<EntityId>* known =
      filter ? filter->answers(query) : nullptr;
  int r = 1;
  const auto n = static_cast<EntityId>(params.num_entities);
  for (EntityId c = 0; c < n; ++c) {
    if (c == gold) continue;
    if (known && known->contains(c)) continue;
    if (score(params, detail::candidate_triple(query, c)) >= gold_score) ++r;
  }
  return r;
}

// Ranks both directed queries of every triple in the split.
inline Metrics evaluate(const ModelParams& params, const Dataset& ds,
                        const std::string& split_name, bool filtered,
                        int threads = 1) {
  const auto& split = ds.split(split_name);
  if (split.empty()) throw ContractError("evaluate: empty split " + split_name);
  std::optional<FilterIndex> filter;
  if (filtered) filter.emplace(ds);
  const FilterIndex* fp = filter ? &*filter : nullptr;

  std::vector<int> ranks(2 * split.size());
  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& t = split[i];
      ranks[2 * i] = rank(params, tail_query(t), t.tail, fp);
      ranks[2 * i + 1] = rank(params, head_query(t), t.head, fp);
    }
  };
  if (threads <= 1) {
    worker(0, split.size());
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (split.size() + threads - 1) / threads;
    for (int k = 0; k < threads; ++k) {
      std::size_t b = std::min(split.size(), static_cast<std::size_t>(k) * chunk);
      std::size_t e = std::min(split.size(), b + chunk);
      if (b < e) pool.emplace_back(worker, b, e);
    }
    for (auto& th : pool) th.join();
  }

  Metrics m;
  m.n_queries = ranks.size();
  for (int r : ranks) {
    m.mrr += 1.0 / r;
    if (r <= 1) m.hits1 += 1;
    if (r <= 3) m.hits3 += 1;
    if (r <= 10) m.hits10 += 1;
  }
  m.mrr /= static_cast<double>(m.n_queries);
  m.hits1 /= static_cast<double>(m.n_queries);
  m.hits3 /= static_cast<double>(m.n_queries);
  m.hits10 /= static_cast<double>(m.n_queries);
  return m;
}

// Softmax over all candidate scores; sums to 1. Intended for small |E|.
inline std::vector<double> predict_distribution(const ModelParams& params,
                                                const Query& query) {
  const auto n = params.num_entities;
  std::vector<double> scores(n);
  for (std::size_t c = 0; c < n; ++c) {
    scores[c] = score(params, detail::candidate_triple(query, static_cast<EntityId>(c)));
  }
  double mx = *std::max_element(scores.begin(), scores.end());
  double sum = 0;
  for (auto& s : scores) {
    s = std::exp(s - mx);
    sum += s;
  }
  for (auto& s : scores) s /= sum;
  return scores;
}

}  // namespace kge
