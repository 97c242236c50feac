#pragma once

// Triple data: loading, vocabularies, frequency counting, sparse-subset
// extraction and frequency-rank export.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kge/errors.hpp"

namespace kge {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

enum class Direction { TailQuery, HeadQuery };  // (e,r,?) vs (?,r,e)

struct Query {
  EntityId anchor = 0;
  RelationId relation = 0;
  Direction direction = Direction::TailQuery;

  friend bool operator==(const Query&, const Query&) = default;
};

struct QueryHash {
  std::size_t operator()(const Query& q) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 1099511628211ull;
    };
    mix(static_cast<std::uint64_t>(q.anchor));
    mix(static_cast<std::uint64_t>(q.relation));
    mix(q.direction == Direction::TailQuery ? 0u : 1u);
    return static_cast<std::size_t>(h);
  }
};

// Two directed completion queries for a triple, plus the gold answer.
inline Query tail_query(const Triple& t) {
  return {t.head, t.relation, Direction::TailQuery};
}
inline Query head_query(const Triple& t) {
  return {t.tail, t.relation, Direction::HeadQuery};
}
inline EntityId gold_answer(const Triple& t, Direction d) {
  return d == Direction::TailQuery ? t.tail : t.head;
}

class Vocab {
 public:
  EntityId intern_entity(const std::string& name) {
    auto [it, inserted] = entity_ids_.try_emplace(
        name, static_cast<EntityId>(entity_names_.size()));
    if (inserted) entity_names_.push_back(name);
    return it->second;
  }

  RelationId intern_relation(const std::string& name) {
    auto [it, inserted] = relation_ids_.try_emplace(
        name, static_cast<RelationId>(relation_names_.size()));
    if (inserted) relation_names_.push_back(name);
    return it->second;
  }

  std::size_t num_entities() const { return entity_names_.size(); }
  std::size_t num_relations() const { return relation_names_.size(); }

  const std::string& entity_name(EntityId id) const {
    return entity_names_.at(static_cast<std::size_t>(id));
  }
  const std::string& relation_name(RelationId id) const {
    return relation_names_.at(static_cast<std::size_t>(id));
  }

 private:
  std::unordered_map<std::string, EntityId> entity_ids_;
  std::unordered_map<std::string, RelationId> relation_ids_;
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
};

struct Dataset {
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  Vocab vocab;

  const std::vector<Triple>& split(const std::string& name) const {
    if (name == "train") return train;
    if (name == "valid") return valid;
    if (name == "test") return test;
    throw ParameterError("unknown split: " + name);
  }
};

namespace detail {

inline void parse_split(const std::string& path, Vocab& vocab,
                        std::vector<Triple>& out, const char* split_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::set<Triple> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos ||
        line.find('\t', t2 + 1) != std::string::npos) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected 3 tab-separated fields");
    }
    Triple tr;
    tr.head = vocab.intern_entity(line.substr(0, t1));
    tr.relation = vocab.intern_relation(line.substr(t1 + 1, t2 - t1 - 1));
    tr.tail = vocab.intern_entity(line.substr(t2 + 1));
    if (!seen.insert(tr).second) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": duplicate triple in " + split_name + " split");
    }
    out.push_back(tr);
  }
}

}  // namespace detail

// Loads three TSV splits (head<TAB>relation<TAB>tail) into one Dataset with a
// vocabulary shared over the union of the splits.
inline Dataset load_triples(const std::string& train_path,
                            const std::string& valid_path,
                            const std::string& test_path) {
  Dataset ds;
  detail::parse_split(train_path, ds.vocab, ds.train, "train");
  detail::parse_split(valid_path, ds.vocab, ds.valid, "valid");
  detail::parse_split(test_path, ds.vocab, ds.test, "test");
  if (ds.train.empty()) throw DataError(train_path + ": empty train split");
  return ds;
}

// Counts #(e,r) and #(r,e) over the training split. The triple frequency
// #(x,y) is approximated as #(e,r) + #(r,e); the query frequency of a
// directed query is the count of its anchor-relation pair. Normalization
// sums for subsampling run over the doubled example set (each train triple
// contributes a head-direction and a tail-direction example).
class FrequencyTable {
 public:
  explicit FrequencyTable(const std::vector<Triple>& train) {
    if (train.empty()) throw ContractError("FrequencyTable needs a non-empty train split");
    for (const auto& t : train) {
      ++headrel_[key(t.head, t.relation)];
      ++reltail_[key(t.relation, t.tail)];
    }
    train_ = &train;
  }

  std::int64_t headrel_count(EntityId e, RelationId r) const {
    auto it = headrel_.find(key(e, r));
    return it == headrel_.end() ? 0 : it->second;
  }
  std::int64_t reltail_count(RelationId r, EntityId e) const {
    auto it = reltail_.find(key(r, e));
    return it == reltail_.end() ? 0 : it->second;
  }

  std::int64_t triple_freq(const Triple& t) const {
    return headrel_count(t.head, t.relation) + reltail_count(t.relation, t.tail);
  }

  std::int64_t query_freq(const Query& q) const {
    return q.direction == Direction::TailQuery
               ? headrel_count(q.anchor, q.relation)
               : reltail_count(q.relation, q.anchor);
  }

  std::size_t num_examples() const { return 2 * train_->size(); }

  struct AlphaSums {
    double triple_sum = 0;  // sum over examples of triple_freq^{-alpha}
    double query_sum = 0;   // sum over examples of query_freq^{-alpha}
  };

  // Cached per alpha; compute once per training run.
  const AlphaSums& sums_for(double alpha) const {
    auto it = alpha_cache_.find(alpha);
    if (it != alpha_cache_.end()) return it->second;
    AlphaSums s;
    for (const auto& t : *train_) {
      double tf = static_cast<double>(triple_freq(t));
      s.triple_sum += 2.0 * std::pow(tf, -alpha);
      s.query_sum += std::pow(static_cast<double>(query_freq(tail_query(t))), -alpha);
      s.query_sum += std::pow(static_cast<double>(query_freq(head_query(t))), -alpha);
    }
    return alpha_cache_.emplace(alpha, s).first->second;
  }

 private:
  static std::uint64_t key(std::int64_t a, std::int64_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  }

  std::unordered_map<std::uint64_t, std::int64_t> headrel_;
  std::unordered_map<std::uint64_t, std::int64_t> reltail_;
  const std::vector<Triple>* train_ = nullptr;
  mutable std::map<double, AlphaSums> alpha_cache_;
};

inline FrequencyTable count_frequencies(const Dataset& ds) {
  return FrequencyTable(ds.train);
}

enum class SubsetMode { High, Low, Both };

// Extracts the triples whose queries sit in the top/bottom `fraction` of the
// distinct query-frequency values of the training split. A triple qualifies
// if either of its two queries meets the threshold; queries unseen in
// training have frequency 0 and always satisfy the Low threshold. The result
// keeps split membership and re-densifies the vocabulary.
inline Dataset extract_sparse_subset(const Dataset& ds, double fraction,
                                     SubsetMode mode) {
  if (!(fraction > 0.0) || fraction > 0.5) {
    throw ParameterError("fraction must be in (0, 0.5]");
  }
  FrequencyTable freq(ds.train);

  std::set<std::int64_t> distinct;
  for (const auto& t : ds.train) {
    distinct.insert(freq.query_freq(tail_query(t)));
    distinct.insert(freq.query_freq(head_query(t)));
  }
  std::vector<std::int64_t> vals(distinct.begin(), distinct.end());  // ascending
  auto k = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(vals.size())));
  k = std::max<std::size_t>(k, 1);
  const std::int64_t low_threshold = vals[k - 1];
  const std::int64_t high_threshold = vals[vals.size() - k];

  auto selected = [&](const Triple& t) {
    std::int64_t ft = freq.query_freq(tail_query(t));
    std::int64_t fh = freq.query_freq(head_query(t));
    bool high = std::max(ft, fh) >= high_threshold;
    bool low = std::min(ft, fh) <= low_threshold;
    switch (mode) {
      case SubsetMode::High: return high;
      case SubsetMode::Low: return low;
      case SubsetMode::Both: return high || low;
    }
    return false;
  };

  Dataset out;
  auto copy_split = [&](const std::vector<Triple>& src, std::vector<Triple>& dst) {
    for (const auto& t : src) {
      if (!selected(t)) continue;
      Triple remapped;
      remapped.head = out.vocab.intern_entity(ds.vocab.entity_name(t.head));
      remapped.relation = out.vocab.intern_relation(ds.vocab.relation_name(t.relation));
      remapped.tail = out.vocab.intern_entity(ds.vocab.entity_name(t.tail));
      dst.push_back(remapped);
    }
  };
  copy_split(ds.train, out.train);
  copy_split(ds.valid, out.valid);
  copy_split(ds.test, out.test);
  return out;
}

// Writes (kind, rank, frequency) rows: distinct train queries and gold-answer
// entity counts, each sorted by descending frequency.
inline void export_frequency_ranks(const Dataset& ds, const std::string& out_path) {
  FrequencyTable freq(ds.train);

  std::unordered_map<Query, std::int64_t, QueryHash> queries;
  std::unordered_map<EntityId, std::int64_t> answers;
  for (const auto& t : ds.train) {
    queries[tail_query(t)] = freq.query_freq(tail_query(t));
    queries[head_query(t)] = freq.query_freq(head_query(t));
    ++answers[t.tail];
    ++answers[t.head];
  }

  auto sorted_counts = [](const auto& m) {
    std::vector<std::int64_t> v;
    v.reserve(m.size());
    for (const auto& [k, c] : m) v.push_back(c);
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
  };

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + out_path);
  out << "kind,rank,frequency\n";
  std::size_t rank = 1;
  for (auto c : sorted_counts(queries)) out << "query," << rank++ << "," << c << "\n";
  rank = 1;
  for (auto c : sorted_counts(answers)) out << "answer," << rank++ << "," << c << "\n";
  if (!out) throw IoError("write failed: " + out_path);
}

// Writes a split back out in the TSV format load_triples reads.
inline void write_split_tsv(const Dataset& ds, const std::vector<Triple>& split,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& t : split) {
    out << ds.vocab.entity_name(t.head) << '\t'
        << ds.vocab.relation_name(t.relation) << '\t'
        << ds.vocab.entity_name(t.tail) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace kge
