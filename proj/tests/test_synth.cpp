#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include "helpers.hpp"
#include "kge/data.hpp"
#include "kge/synth.hpp"

using namespace kge;

namespace {

// Least-squares slope of log(frequency) against log(rank) for train queries.
double loglog_slope(const Dataset& ds) {
  FrequencyTable freq(ds.train);
  std::map<Query, std::int64_t, decltype([](const Query& a, const Query& b) {
             return std::tie(a.anchor, a.relation, a.direction) <
                    std::tie(b.anchor, b.relation, b.direction);
           })>
      counts;
  for (const auto& t : ds.train) {
    counts[tail_query(t)] = freq.query_freq(tail_query(t));
    counts[head_query(t)] = freq.query_freq(head_query(t));
  }
  std::vector<double> freqs;
  for (const auto& [q, c] : counts) freqs.push_back(static_cast<double>(c));
  std::sort(freqs.rbegin(), freqs.rend());

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = static_cast<double>(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    double x = std::log(static_cast<double>(i + 1));
    double y = std::log(freqs[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("generate rejects infeasible configs") {
  CHECK_THROWS_AS(generate({2, 1, 100, 1.0, 0}), ParameterError);  // 4 possible
  CHECK_THROWS_AS(generate({0, 1, 1, 1.0, 0}), ParameterError);
}

TEST_CASE("generate is deterministic for a fixed seed") {
  SynthConfig cfg{50, 5, 400, 1.0, 7};
  Dataset a = generate(cfg);
  Dataset b = generate(cfg);
  CHECK(a.train == b.train);
  CHECK(a.valid == b.valid);
  CHECK(a.test == b.test);
}

TEST_CASE("generated triples are unique and splits near 80/10/10") {
  SynthConfig cfg{100, 8, 2000, 1.0, 3};
  Dataset ds = generate(cfg);

  std::set<Triple> all;
  for (const auto* split : {&ds.train, &ds.valid, &ds.test}) {
    for (const auto& t : *split) REQUIRE(all.insert(t).second);
  }
  CHECK(all.size() == 2000);
  CHECK(ds.train.size() >= 1600);  // reassignment only grows train
  CHECK(ds.valid.size() <= 200);
  CHECK(ds.test.size() <= 201);
}

TEST_CASE("every valid/test entity and relation appears in train") {
  SynthConfig cfg{200, 10, 3000, 1.4, 11};
  Dataset ds = generate(cfg);
  std::unordered_set<EntityId> ents;
  std::unordered_set<RelationId> rels;
  for (const auto& t : ds.train) {
    ents.insert(t.head);
    ents.insert(t.tail);
    rels.insert(t.relation);
  }
  for (const auto* split : {&ds.valid, &ds.test}) {
    for (const auto& t : *split) {
      CHECK(ents.contains(t.head));
      CHECK(ents.contains(t.tail));
      CHECK(rels.contains(t.relation));
    }
  }
}

TEST_CASE("exponent near 0 gives an approximately flat frequency histogram") {
  // Raw max/min at these sizes is dominated by Poisson noise, so the
  // flatness check trims to the 10th/90th percentiles of per-entity counts:
  // roughly 2 for uniform draws, well above 10 for zipf 1.5.
  auto p90_over_p10 = [](double exponent, unsigned seed) {
    Dataset ds = generate({50, 5, 500, exponent, seed});
    std::map<EntityId, long> counts;
    for (const auto& t : ds.train) {
      ++counts[t.head];
      ++counts[t.tail];
    }
    std::vector<long> v;
    for (const auto& [e, c] : counts) v.push_back(c);
    std::sort(v.begin(), v.end());
    return static_cast<double>(v[v.size() * 9 / 10]) /
           static_cast<double>(v[v.size() / 10]);
  };
  for (unsigned seed : {13u, 14u, 15u}) {
    CHECK(p90_over_p10(1e-9, seed) < 3.0);
    CHECK(p90_over_p10(1.5, seed) > 3.0);
  }
}

TEST_CASE("steeper exponent gives a steeper frequency-rank slope") {
  Dataset steep = generate({300, 10, 5000, 1.5, 21});
  Dataset shallow = generate({300, 10, 5000, 0.5, 21});
  double s_steep = loglog_slope(steep);
  double s_shallow = loglog_slope(shallow);
  CHECK(s_steep < 0);
  CHECK(s_steep < s_shallow);
}

TEST_CASE("synth output round-trips through the TSV loader") {
  testutil::TempDir dir;
  Dataset ds = generate({40, 4, 300, 1.0, 5});
  auto train = (dir.path() / "train.txt").string();
  auto valid = (dir.path() / "valid.txt").string();
  auto test = (dir.path() / "test.txt").string();
  write_split_tsv(ds, ds.train, train);
  write_split_tsv(ds, ds.valid, valid);
  write_split_tsv(ds, ds.test, test);

  Dataset loaded = load_triples(train, valid, test);
  CHECK(loaded.train.size() == ds.train.size());
  CHECK(loaded.valid.size() == ds.valid.size());
  CHECK(loaded.test.size() == ds.test.size());
  CHECK(loaded.vocab.num_entities() == ds.vocab.num_entities());
}
