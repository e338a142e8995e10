#include "fairrep/synth.hpp"

#include <cmath>
#include <random>
#include <string>

#include "fairrep/error.hpp"
#include "fairrep/random.hpp"

namespace fairrep {
namespace {

struct Draw {
  std::uint8_t s;
  double score;  // w.x + bias_s * s
};

Draw draw(const SynthSpec& spec, const Vector& w, Rng& rng, double* x_out) {
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::uint8_t s = coin(rng) ? 1 : 0;
  double score = spec.bias_s * s;
  for (std::size_t j = 0; j < spec.d; ++j) {
    const double x = gauss(rng) + spec.group_shift * s;
    if (x_out) x_out[j] = x;
    score += w[j] * x;
  }
  return {s, score};
}

}  // namespace

Vector SynthSpec::weights() const { return label_weights.empty() ? Vector(d, 1.0) : label_weights; }

void SynthSpec::validate() const {
  if (d < 1) throw InputError("synthetic spec: d must be >= 1");
  if (n < 4) throw InputError("synthetic spec: n must be >= 4");
  if (!label_weights.empty() && label_weights.size() != d) {
    throw InputError("synthetic spec: " + std::to_string(label_weights.size()) + " label weights for d = " +
                     std::to_string(d));
  }
}

SynthTruth synthetic_ground_truth(const SynthSpec& spec, std::size_t draws) {
  spec.validate();
  const Vector w = spec.weights();
  Rng rng(derive_seed(spec.seed, 0x7417));
  std::size_t count[2] = {0, 0};
  std::size_t positive[2] = {0, 0};
  double label_mass[2] = {0, 0};
  double acc = 0.0;
  for (std::size_t k = 0; k < draws; ++k) {
    const Draw d = draw(spec, w, rng, nullptr);
    const double p = sigmoid(d.score);
    ++count[d.s];
    positive[d.s] += d.score > 0 ? 1 : 0;
    label_mass[d.s] += p;
    acc += d.score > 0 ? p : 1.0 - p;
  }
  SynthTruth t;
  t.draws = draws;
  auto rate = [](double a, std::size_t b) { return b ? a / static_cast<double>(b) : 0.0; };
  t.bayes_rate0 = rate(static_cast<double>(positive[0]), count[0]);
  t.bayes_rate1 = rate(static_cast<double>(positive[1]), count[1]);
  t.bayes_dp = std::fabs(t.bayes_rate0 - t.bayes_rate1);
  t.bayes_acc = acc / static_cast<double>(draws);
  t.label_rate0 = rate(label_mass[0], count[0]);
  t.label_rate1 = rate(label_mass[1], count[1]);
  return t;
}

SyntheticData generate_synthetic(const SynthSpec& spec, std::size_t truth_draws) {
  spec.validate();
  const Vector w = spec.weights();
  Rng rng(derive_seed(spec.seed, 0x5eed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Dataset d;
  d.X = Matrix(spec.n, spec.d);
  d.s.resize(spec.n);
  d.y.resize(spec.n);
  d.split.assign(spec.n, Split::train);
  for (std::size_t j = 0; j < spec.d; ++j) d.feature_names.push_back("x" + std::to_string(j));
  for (std::size_t i = 0; i < spec.n; ++i) {
    const Draw dr = draw(spec, w, rng, d.X.row(i).data());
    d.s[i] = dr.s;
    d.y[i] = unit(rng) < sigmoid(dr.score) ? 1 : 0;
  }
  SplitScheme scheme{.kind = SplitScheme::Kind::random,
                     .test_fraction = spec.test_fraction,
                     .val_fraction = spec.val_fraction};
  return {split(std::move(d), scheme, spec.seed), synthetic_ground_truth(spec, truth_draws)};
}

}  // namespace fairrep
