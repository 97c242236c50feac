#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "kge/smoothing.hpp"

using namespace kge;

namespace {

// All (query, answer) examples of the doubled training set.
std::vector<std::pair<Query, EntityId>> doubled_examples(const Dataset& ds) {
  std::vector<std::pair<Query, EntityId>> out;
  for (const auto& t : ds.train) {
    out.emplace_back(tail_query(t), t.tail);
    out.emplace_back(head_query(t), t.head);
  }
  return out;
}

}  // namespace

TEST_CASE("hand-computed fixture weights") {
  Dataset ds = testutil::fixture3();
  FrequencyTable freq = count_frequencies(ds);
  EntityId A = 0, B = 1, C = 2, D = 3;
  RelationId r = 0;
  Query qA{A, r, Direction::TailQuery};
  Query qD{D, r, Direction::TailQuery};

  SECTION("Base at alpha=1: 9/11 and 12/11") {
    auto wAB = subsampling_weights(freq, qA, B, SubsamplingAssumption::Base, 1.0);
    auto wAC = subsampling_weights(freq, qA, C, SubsamplingAssumption::Base, 1.0);
    auto wDB = subsampling_weights(freq, qD, B, SubsamplingAssumption::Base, 1.0);
    CHECK(wAB.a == Catch::Approx(9.0 / 11.0).epsilon(1e-12));
    CHECK(wAB.b == Catch::Approx(9.0 / 11.0).epsilon(1e-12));
    CHECK(wAC.a == Catch::Approx(12.0 / 11.0).epsilon(1e-12));
    CHECK(wDB.a == Catch::Approx(12.0 / 11.0).epsilon(1e-12));
  }

  SECTION("Uniq at alpha=1: 0.75 and 1.5") {
    auto wA = subsampling_weights(freq, qA, B, SubsamplingAssumption::Uniq, 1.0);
    auto wD = subsampling_weights(freq, qD, B, SubsamplingAssumption::Uniq, 1.0);
    CHECK(wA.a == Catch::Approx(0.75).epsilon(1e-12));
    CHECK(wA.b == Catch::Approx(0.75).epsilon(1e-12));
    CHECK(wD.a == Catch::Approx(1.5).epsilon(1e-12));
  }

  SECTION("alpha=0 gives exactly 1 for every assumption") {
    for (auto assumption : {SubsamplingAssumption::None, SubsamplingAssumption::Base,
                            SubsamplingAssumption::Freq, SubsamplingAssumption::Uniq}) {
      auto w = subsampling_weights(freq, qA, B, assumption, 0.0);
      CHECK(w.a == 1.0);
      CHECK(w.b == 1.0);
    }
  }

  SECTION("unseen example under a count-based assumption is a contract error") {
    Query unseen{B, r, Direction::TailQuery};
    CHECK_THROWS_AS(
        subsampling_weights(freq, unseen, A, SubsamplingAssumption::Base, 1.0),
        ContractError);
  }
}

TEST_CASE("mean weight over the doubled example set is exactly 1") {
  std::mt19937_64 rng(5);
  Dataset ds = testutil::random_dataset(rng, 50, 5, 800);
  FrequencyTable freq = count_frequencies(ds);
  auto examples = doubled_examples(ds);

  for (auto assumption : {SubsamplingAssumption::Base, SubsamplingAssumption::Freq,
                          SubsamplingAssumption::Uniq}) {
    for (double alpha : {-2.0, -0.5, 0.5, 1.0}) {
      double sum_a = 0, sum_b = 0;
      for (const auto& [q, y] : examples) {
        auto w = subsampling_weights(freq, q, y, assumption, alpha);
        CHECK(w.a > 0);
        CHECK(w.b > 0);
        sum_a += w.a;
        sum_b += w.b;
      }
      double n = static_cast<double>(examples.size());
      INFO("assumption=" << assumption_name(assumption) << " alpha=" << alpha);
      CHECK(std::abs(sum_a / n - 1.0) <= 1e-9);
      CHECK(std::abs(sum_b / n - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("pointwise structure of the assumptions") {
  std::mt19937_64 rng(6);
  Dataset ds = testutil::random_dataset(rng, 30, 3, 400);
  FrequencyTable freq = count_frequencies(ds);

  bool freq_differs = false;
  for (const auto& [q, y] : doubled_examples(ds)) {
    auto base = subsampling_weights(freq, q, y, SubsamplingAssumption::Base, 0.7);
    auto uniq = subsampling_weights(freq, q, y, SubsamplingAssumption::Uniq, 0.7);
    auto fr = subsampling_weights(freq, q, y, SubsamplingAssumption::Freq, 0.7);
    CHECK(base.a == base.b);
    CHECK(uniq.a == uniq.b);
    CHECK(fr.a == base.a);  // Freq's positive weight uses the triple frequency
    CHECK(fr.b == uniq.b);  // and its negative weight the query frequency
    if (fr.a != fr.b) freq_differs = true;
  }
  CHECK(freq_differs);
}

TEST_CASE("weights are invariant to permutation of the training list") {
  std::mt19937_64 rng(8);
  Dataset ds = testutil::random_dataset(rng, 25, 3, 300);
  Dataset shuffled = ds;
  std::shuffle(shuffled.train.begin(), shuffled.train.end(), rng);

  FrequencyTable f1 = count_frequencies(ds);
  FrequencyTable f2 = count_frequencies(shuffled);
  for (const auto& [q, y] : doubled_examples(ds)) {
    auto w1 = subsampling_weights(f1, q, y, SubsamplingAssumption::Freq, 1.3);
    auto w2 = subsampling_weights(f2, q, y, SubsamplingAssumption::Freq, 1.3);
    CHECK(w1.a == Catch::Approx(w2.a).epsilon(1e-12));
    CHECK(w1.b == Catch::Approx(w2.b).epsilon(1e-12));
  }
}
