#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "kge/data.hpp"
#include "kge/scoring.hpp"

namespace testutil {

using StrTriple = std::tuple<std::string, std::string, std::string>;

inline kge::Dataset make_dataset(const std::vector<StrTriple>& train,
                                 const std::vector<StrTriple>& valid = {},
                                 const std::vector<StrTriple>& test = {}) {
  kge::Dataset ds;
  auto add = [&](const std::vector<StrTriple>& src, std::vector<kge::Triple>& dst) {
    for (const auto& [h, r, t] : src) {
      kge::Triple tr;
      tr.head = ds.vocab.intern_entity(h);
      tr.relation = ds.vocab.intern_relation(r);
      tr.tail = ds.vocab.intern_entity(t);
      dst.push_back(tr);
    }
  };
  add(train, ds.train);
  add(valid, ds.valid);
  add(test, ds.test);
  return ds;
}

// The 3-triple fixture used throughout: {(A,r,B),(A,r,C),(D,r,B)}.
inline kge::Dataset fixture3() {
  return make_dataset({{"A", "r", "B"}, {"A", "r", "C"}, {"D", "r", "B"}});
}

// Random KG with unique triples; entity/relation ids become names.
inline kge::Dataset random_dataset(std::mt19937_64& rng, int n_entities,
                                   int n_relations, int n_triples) {
  std::uniform_int_distribution<int> ent(0, n_entities - 1);
  std::uniform_int_distribution<int> rel(0, n_relations - 1);
  std::set<std::array<int, 3>> seen;
  std::vector<StrTriple> triples;
  while (static_cast<int>(triples.size()) < n_triples) {
    std::array<int, 3> t = {ent(rng), rel(rng), ent(rng)};
    if (!seen.insert(t).second) continue;
    triples.emplace_back("e" + std::to_string(t[0]), "r" + std::to_string(t[1]),
                         "e" + std::to_string(t[2]));
  }
  return make_dataset(triples);
}

inline kge::Triple random_triple(std::mt19937_64& rng, const kge::ModelParams& p) {
  std::uniform_int_distribution<int> ent(0, static_cast<int>(p.num_entities) - 1);
  std::uniform_int_distribution<int> rel(0, static_cast<int>(p.num_relations) - 1);
  return {ent(rng), rel(rng), ent(rng)};
}

// Central finite difference of the score wrt one parameter slot.
inline double score_fd(kge::ModelParams& p, const kge::Triple& t, double* slot,
                       double step = 1e-6) {
  const double saved = *slot;
  *slot = saved + step;
  double up = kge::score(p, t);
  *slot = saved - step;
  double down = kge::score(p, t);
  *slot = saved;
  return (up - down) / (2 * step);
}

class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      auto candidate = base / ("kge_test_" + std::to_string(std::random_device{}()));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("cannot create temp dir");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

  std::string write(const std::string& name, const std::string& content) const {
    auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p.string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
