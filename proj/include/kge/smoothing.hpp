#pragma once

// Count-based subsampling weights A and B. Each weight is a frequency raised
// to -alpha, normalized so its mean over the doubled training-example set is
// exactly 1.

#include <cmath>
#include <string>

#include "kge/data.hpp"
#include "kge/errors.hpp"

namespace kge {

enum class SubsamplingAssumption { None, Base, Freq, Uniq };

inline const char* assumption_name(SubsamplingAssumption a) {
  switch (a) {
    case SubsamplingAssumption::None: return "none";
    case SubsamplingAssumption::Base: return "base";
    case SubsamplingAssumption::Freq: return "freq";
    case SubsamplingAssumption::Uniq: return "uniq";
  }
  return "?";
}

struct SubsamplingWeights {
  double a = 1.0;  // weight on the positive term
  double b = 1.0;  // weight on the negative term
};

inline SubsamplingWeights subsampling_weights(const FrequencyTable& freq,
                                              const Query& query,
                                              EntityId answer,
                                              SubsamplingAssumption assumption,
                                              double alpha) {
  if (assumption == SubsamplingAssumption::None || alpha == 0.0) return {1.0, 1.0};

  Triple t;
  if (query.direction == Direction::TailQuery) {
    t = {query.anchor, query.relation, answer};
  } else {
    t = {answer, query.relation, query.anchor};
  }
  const std::int64_t tf = freq.triple_freq(t);
  const std::int64_t qf = freq.query_freq(query);
  if (tf < 2 || qf < 1) {
    throw ContractError("subsampling weights requested for an example unseen in training");
  }

  const auto& sums = freq.sums_for(alpha);
  const double n = static_cast<double>(freq.num_examples());
  const double triple_w = std::pow(static_cast<double>(tf), -alpha) * n / sums.triple_sum;
  const double query_w = std::pow(static_cast<double>(qf), -alpha) * n / sums.query_sum;

  switch (assumption) {
    case SubsamplingAssumption::Base: return {triple_w, triple_w};
    case SubsamplingAssumption::Freq: return {triple_w, query_w};
    case SubsamplingAssumption::Uniq: return {query_w, query_w};
    case SubsamplingAssumption::None: break;
  }
  return {1.0, 1.0};
}

}  // namespace kge
