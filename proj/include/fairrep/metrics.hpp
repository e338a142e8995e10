#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairrep/ipm.hpp"
#include "fairrep/matrix.hpp"

namespace fairrep {

// Model outputs (logits) with the sensitive attribute and, when known, the label.
struct ScoredBatch {
  Vector logits;
  BinaryVector s;
  BinaryVector y;  // may be empty for DP-only metrics

  void validate(bool need_labels) const;
};

enum class Squash { identity, sigmoid };

// |P(logit > 0 | S=0) - P(logit > 0 | S=1)|
double delta_dp(const ScoredBatch& batch);
// |E[squash(logit) | S=0] - E[squash(logit) | S=1]|
double delta_mdp(const ScoredBatch& batch, Squash squash = Squash::sigmoid);
// Mean over tau_k = k / (grid + 1), k = 1..grid, of the threshold-tau DP gap on sigmoid scores.
double delta_sdp(const ScoredBatch& batch, std::size_t grid = 99);
// |Var(score | S=0) - Var(score | S=1)| with population variances.
double delta_vdp(const ScoredBatch& batch, Squash squash = Squash::identity);
double accuracy(const ScoredBatch& batch);

enum class GapMetric { dp, mdp, sdp, vdp };

double gap_metric(const ScoredBatch& batch, GapMetric metric);

// EOpp: `inner` restricted to y = 0. EO: sum of `inner` over y in {0, 1}.
double group_conditional_gap(const ScoredBatch& batch, FairnessTarget target, GapMetric inner = GapMetric::dp);

struct FairnessReport {
  double acc = 0.0;
  double delta_dp = 0.0;
  double delta_mdp = 0.0;
  double delta_sdp = 0.0;
  double delta_vdp = 0.0;
  double eopp = 0.0;
  double eo = 0.0;
  // Mean-DP on raw logits, emitted alongside the probability-scale value.
  double delta_mdp_raw = 0.0;

  friend bool operator==(const FairnessReport&, const FairnessReport&) = default;
};

// Every metric on one batch. Conditional gaps whose strata are empty are NaN.
FairnessReport evaluate(const ScoredBatch& batch);

// Fixed column order: acc, dp, mdp, sdp, vdp, eopp, eo.
std::string report_csv_header();
std::string report_csv_row(const FairnessReport& r);
std::string report_json(const FairnessReport& r);
FairnessReport report_from_json(const std::string& text);

struct ParetoPoint {
  double fairness = 0.0;
  double acc = 0.0;
  std::size_t tag = 0;  // caller-defined, e.g. index into a sweep

  friend bool operator==(const ParetoPoint&, const ParetoPoint&) = default;
};

// Points not dominated by any other (another point with <= fairness and >= acc,
// one of them strict), sorted by fairness ascending. Exact duplicates are kept once.
std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points);

}  // namespace fairrep
