#pragma once

// Synthetic KG generation with Zipf-distributed head/relation/tail draws,
// giving the long-tailed query and answer frequencies real KGs show.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "kge/data.hpp"
#include "kge/errors.hpp"

namespace kge {

struct SynthConfig {
  std::size_t n_entities = 100;
  std::size_t n_relations = 10;
  std::size_t n_triples = 1000;
  double zipf_exponent = 1.0;
  std::uint64_t seed = 0;
};

namespace detail {

// Inverse-CDF sampler over weights (i+1)^-z; exact and deterministic.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += std::pow(static_cast<double>(i + 1), -exponent);
      cdf_[i] = acc;
    }
    for (auto& v : cdf_) v /= acc;
  }

  std::size_t draw(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u(rng));
    return static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace detail

// Draws unique triples with Zipf-distributed components, then splits
// 80/10/10 by shuffled order. Valid/test triples whose entity or relation is
// unseen in train are reassigned to train so every evaluated id is trained.
inline Dataset generate(const SynthConfig& cfg) {
  const double capacity = static_cast<double>(cfg.n_entities) *
                          static_cast<double>(cfg.n_entities) *
                          static_cast<double>(cfg.n_relations);
  if (cfg.n_entities == 0 || cfg.n_relations == 0 || cfg.n_triples == 0 ||
      static_cast<double>(cfg.n_triples) > capacity) {
    throw ParameterError("infeasible synth configuration");
  }

  std::mt19937_64 rng(cfg.seed);
  detail::ZipfSampler ent(cfg.n_entities, cfg.zipf_exponent);
  detail::ZipfSampler rel(cfg.n_relations, cfg.zipf_exponent);

  std::set<Triple> unique;
  std::vector<Triple> triples;
  std::size_t attempts = 0;
  const std::size_t max_attempts = 100 * cfg.n_triples;
  while (triples.size() < cfg.n_triples) {
    if (++attempts > max_attempts) {
      throw DataError("synthetic generation stalled rejecting duplicates");
    }
    Triple t;
    t.head = static_cast<EntityId>(ent.draw(rng));
    t.relation = static_cast<RelationId>(rel.draw(rng));
    t.tail = static_cast<EntityId>(ent.draw(rng));
    if (unique.insert(t).second) triples.push_back(t);
  }

  std::shuffle(triples.begin(), triples.end(), rng);
  std::size_t n_valid = cfg.n_triples / 10;
  std::size_t n_test = cfg.n_triples / 10;
  std::size_t n_train = cfg.n_triples - n_valid - n_test;

  std::vector<Triple> train(triples.begin(), triples.begin() + n_train);
  std::vector<Triple> rest(triples.begin() + n_train, triples.end());

  std::unordered_set<std::int64_t> seen_ent, seen_rel;
  auto note = [&](const Triple& t) {
    seen_ent.insert(t.head);
    seen_ent.insert(t.tail);
    seen_rel.insert(t.relation);
  };
  for (const auto& t : train) note(t);

  // Multiple passes: reassigning a triple to train can legitimize others.
  std::vector<Triple> valid, test;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Triple> still_rest;
    for (const auto& t : rest) {
      if (seen_ent.contains(t.head) && seen_ent.contains(t.tail) &&
          seen_rel.contains(t.relation)) {
        still_rest.push_back(t);
      } else {
        train.push_back(t);
        note(t);
        changed = true;
      }
    }
    rest.swap(still_rest);
  }
  n_valid = std::min(n_valid, rest.size());
  valid.assign(rest.begin(), rest.begin() + n_valid);
  test.assign(rest.begin() + n_valid, rest.end());

  Dataset ds;
  auto intern = [&](const Triple& t) {
    Triple out;
    out.head = ds.vocab.intern_entity("e" + std::to_string(t.head));
    out.relation = ds.vocab.intern_relation("r" + std::to_string(t.relation));
    out.tail = ds.vocab.intern_entity("e" + std::to_string(t.tail));
    return out;
  };
  for (const auto& t : train) ds.train.push_back(intern(t));
  for (const auto& t : valid) ds.valid.push_back(intern(t));
  for (const auto& t : test) ds.test.push_back(intern(t));
  return ds;
}

}  // namespace kge
