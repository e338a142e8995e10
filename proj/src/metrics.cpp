#include "fairrep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "fairrep/error.hpp"

namespace fairrep {
namespace {

struct Groups {
  std::vector<double> g0;
  std::vector<double> g1;
};

Groups split_scores(const ScoredBatch& batch, Squash squash, int label = -1) {
  Groups out;
  for (std::size_t i = 0; i < batch.logits.size(); ++i) {
    if (label >= 0 && batch.y[i] != label) continue;
    const double v = squash == Squash::sigmoid ? sigmoid(batch.logits[i]) : batch.logits[i];
    (batch.s[i] ? out.g1 : out.g0).push_back(v);
  }
  if (out.g0.empty() || out.g1.empty()) {
    throw EmptyGroup("metric needs both sensitive groups (n0=" + std::to_string(out.g0.size()) +
                     ", n1=" + std::to_string(out.g1.size()) + ")");
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double population_variance(const std::vector<double>& v) {
  const double mu = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(v.size());
}

double rate_above(const std::vector<double>& v, double tau) {
  std::size_t c = 0;
  for (double x : v) c += x > tau ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(v.size());
}

double dp_gap(const Groups& g) { return std::fabs(rate_above(g.g0, 0.0) - rate_above(g.g1, 0.0)); }

double sdp_gap(const Groups& g, std::size_t grid) {
  if (grid == 0) throw InputError("delta_sdp needs at least one threshold");
  double acc = 0.0;
  for (std::size_t k = 1; k <= grid; ++k) {
    const double tau = static_cast<double>(k) / static_cast<double>(grid + 1);
    acc += std::fabs(rate_above(g.g0, tau) - rate_above(g.g1, tau));
  }
  return acc / static_cast<double>(grid);
}

double gap_on(const Groups& logits, const Groups& probs, GapMetric metric) {
  switch (metric) {
    case GapMetric::dp: return dp_gap(logits);
    case GapMetric::mdp: return std::fabs(mean(probs.g0) - mean(probs.g1));
    case GapMetric::sdp: return sdp_gap(probs, 99);
    case GapMetric::vdp: return std::fabs(population_variance(logits.g0) - population_variance(logits.g1));
  }
  return 0.0;
}

}  // namespace

void ScoredBatch::validate(bool need_labels) const {
  if (s.size() != logits.size()) {
    throw ShapeError("scored batch: " + std::to_string(logits.size()) + " logits vs " + std::to_string(s.size()) +
                     " sensitive values");
  }
  if ((need_labels || !y.empty()) && y.size() != logits.size()) {
    throw ShapeError("scored batch: " + std::to_string(logits.size()) + " logits vs " + std::to_string(y.size()) +
                     " labels");
  }
}

double delta_dp(const ScoredBatch& batch) {
  batch.validate(false);
  return dp_gap(split_scores(batch, Squash::identity));
}

double delta_mdp(const ScoredBatch& batch, Squash squash) {
  batch.validate(false);
  const Groups g = split_scores(batch, squash);
  return std::fabs(mean(g.g0) - mean(g.g1));
}

double delta_sdp(const ScoredBatch& batch, std::size_t grid) {
  batch.validate(false);
  return sdp_gap(split_scores(batch, Squash::sigmoid), grid);
}

double delta_vdp(const ScoredBatch& batch, Squash squash) {
  batch.validate(false);
  const Groups g = split_scores(batch, squash);
  return std::fabs(population_variance(g.g0) - population_variance(g.g1));
}

double accuracy(const ScoredBatch& batch) {
  batch.validate(true);
  if (batch.logits.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < batch.logits.size(); ++i) {
    hits += (batch.logits[i] > 0 ? 1 : 0) == batch.y[i] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(batch.logits.size());
}

double gap_metric(const ScoredBatch& batch, GapMetric metric) {
  switch (metric) {
    case GapMetric::dp: return delta_dp(batch);
    case GapMetric::mdp: return delta_mdp(batch, Squash::sigmoid);
    case GapMetric::sdp: return delta_sdp(batch);
    case GapMetric::vdp: return delta_vdp(batch, Squash::identity);
  }
  return 0.0;
}

double group_conditional_gap(const ScoredBatch& batch, FairnessTarget target, GapMetric inner) {
  batch.validate(true);
  auto stratum = [&](int label) {
    return gap_on(split_scores(batch, Squash::identity, label), split_scores(batch, Squash::sigmoid, label), inner);
  };
  switch (target) {
    case FairnessTarget::dp: return gap_metric(batch, inner);
    case FairnessTarget::eopp: return stratum(0);
    case FairnessTarget::eo: return stratum(0) + stratum(1);
  }
  return 0.0;
}

FairnessReport evaluate(const ScoredBatch& batch) {
  FairnessReport r;
  r.acc = accuracy(batch);
  r.delta_dp = delta_dp(batch);
  r.delta_mdp = delta_mdp(batch, Squash::sigmoid);
  r.delta_mdp_raw = delta_mdp(batch, Squash::identity);
  r.delta_sdp = delta_sdp(batch);
  r.delta_vdp = delta_vdp(batch, Squash::identity);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    r.eopp = group_conditional_gap(batch, FairnessTarget::eopp);
  } catch (const EmptyGroup&) {
    r.eopp = nan;
  }
  try {
    r.eo = group_conditional_gap(batch, FairnessTarget::eo);
  } catch (const EmptyGroup&) {
    r.eo = nan;
  }
  return r;
}

std::string report_csv_header() { return "acc,dp,mdp,sdp,vdp,eopp,eo"; }

std::string report_csv_row(const FairnessReport& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << r.acc << ',' << r.delta_dp << ',' << r.delta_mdp << ',' << r.delta_sdp << ',' << r.delta_vdp << ','
     << r.eopp << ',' << r.eo;
  return os.str();
}

namespace {

nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double number_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.at(key).get<double>();
}

}  // namespace

std::string report_json(const FairnessReport& r) {
  nlohmann::ordered_json j;
  j["acc"] = number_or_null(r.acc);
  j["dp"] = number_or_null(r.delta_dp);
  j["mdp"] = number_or_null(r.delta_mdp);
  j["sdp"] = number_or_null(r.delta_sdp);
  j["vdp"] = number_or_null(r.delta_vdp);
  j["eopp"] = number_or_null(r.eopp);
  j["eo"] = number_or_null(r.eo);
  j["mdp_raw"] = number_or_null(r.delta_mdp_raw);
  return j.dump(2) + "\n";
}

FairnessReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("report JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("report JSON must be an object");
  FairnessReport r;
  r.acc = number_from(j, "acc");
  r.delta_dp = number_from(j, "dp");
  r.delta_mdp = number_from(j, "mdp");
  r.delta_sdp = number_from(j, "sdp");
  r.delta_vdp = number_from(j, "vdp");
  r.eopp = number_from(j, "eopp");
  r.eo = number_from(j, "eo");
  r.delta_mdp_raw = number_from(j, "mdp_raw");
  return r;
}

std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points) {
  std::vector<ParetoPoint> front;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    bool dominated = false;
    bool duplicate = false;
    for (std::size_t k = 0; k < points.size() && !dominated; ++k) {
      if (k == i) continue;
      const auto& q = points[k];
      const bool weakly = q.fairness <= p.fairness && q.acc >= p.acc;
      const bool strictly = q.fairness < p.fairness || q.acc > p.acc;
      dominated = weakly && strictly;
      duplicate = duplicate || (k < i && q.fairness == p.fairness && q.acc == p.acc);
    }
    if (!dominated && !duplicate) front.push_back(p);
  }
  std::stable_sort(front.begin(), front.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    return a.fairness < b.fairness || (a.fairness == b.fairness && a.acc > b.acc);
  });
  return front;
}

}  // namespace fairrep
