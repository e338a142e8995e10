#pragma once

#include <cstdint>

#include "fairrep/data.hpp"

namespace fairrep {

// s ~ Bernoulli(1/2), x | s ~ N(group_shift * s * 1, I_d), y ~ Bernoulli(sigmoid(w.x + bias_s * s)).
struct SynthSpec {
  std::size_t n = 8000;
  std::size_t d = 4;
  double group_shift = 1.0;
  Vector label_weights;  // empty -> all ones
  double bias_s = 1.0;
  std::uint64_t seed = 0;
  double test_fraction = 0.3;
  double val_fraction = 0.2;

  Vector weights() const;
  void validate() const;
};

// Monte-Carlo facts about the Bayes rule 1[w.x + bias_s * s > 0].
struct SynthTruth {
  std::size_t draws = 0;
  double bayes_dp = 0.0;
  double bayes_rate0 = 0.0;  // P(yhat = 1 | s = 0)
  double bayes_rate1 = 0.0;
  double bayes_acc = 0.0;
  double label_rate0 = 0.0;  // P(y = 1 | s = 0)
  double label_rate1 = 0.0;
};

struct SyntheticData {
  Dataset data;
  SynthTruth truth;
};

SynthTruth synthetic_ground_truth(const SynthSpec& spec, std::size_t draws = 1'000'000);
// Dataset split randomly by the spec fractions; truth from fresh draws.
SyntheticData generate_synthetic(const SynthSpec& spec, std::size_t truth_draws = 1'000'000);

}  // namespace fairrep
