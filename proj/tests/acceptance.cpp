// Acceptance checks 1-10. One PASS/FAIL/SKIP line per criterion; exit status
// is nonzero when any criterion fails.
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fairrep/data.hpp"
#include "fairrep/ipm.hpp"
#include "fairrep/metrics.hpp"
#include "fairrep/synth.hpp"
#include "fairrep/theory.hpp"
#include "fairrep/train.hpp"
#include "gradcheck.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace fairrep;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
  Verdict verdict = Verdict::fail;
  std::string detail;
};

Outcome check(bool ok, std::string detail) { return {ok ? Verdict::pass : Verdict::fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- 1
Outcome gradients() {
  bool ok = true;
  std::string detail;
  for (const auto& o : gradcheck::run(100, 1e-5)) {
    ok = ok && o.worst < 1e-4;
    detail += fmt("%s %.1e; ", o.path.c_str(), o.worst);
  }
  return check(ok, "max rel err " + detail + "limit 1e-4");
}

GroupedBatch gaussian_batch(Rng& rng, std::size_t m, std::size_t n0, std::size_t n1, double shift) {
  std::normal_distribution<double> g;
  GroupedBatch b{Matrix(n0, m), Matrix(n1, m)};
  for (auto& v : b.z0.values()) v = g(rng);
  for (auto& v : b.z1.values()) v = g(rng) + shift;
  return b;
}

// ---------------------------------------------------------------- 2
// Identical groups leave nothing for the oracle's bounds to prune, so the
// full 801-point grid is used for m = 1 and an 81-point grid for m = 2.
GridSpec prop_one_grid(std::size_t m) {
  GridSpec g;
  if (m > 1) g.theta_points = g.mu_points = 81;
  return g;
}

Outcome proposition_one() {
  Rng rng(derive_seed(2, 0));
  double worst_same = 0, worst_apart = 1e9;
  for (int k = 0; k < 50; ++k) {
    const std::size_t m = 1 + k % 2;
    const GroupedBatch b = gaussian_batch(rng, m, 5 + rng() % 20, 5, 0);
    GroupedBatch same{b.z0, b.z0};
    SipmOptions o;
    o.seed = static_cast<std::uint64_t>(k);
    worst_same = std::max({worst_same, estimate_sipm(same, o), grid_oracle_sipm(same, prop_one_grid(m))});

    // disjoint supports: group 1 translated past group 0 along a random unit direction
    std::vector<double> dir(m);
    double norm = 0;
    for (auto& v : dir) {
      v = std::normal_distribution<double>()(rng);
      norm += v * v;
    }
    GroupedBatch apart = gaussian_batch(rng, m, 5 + rng() % 20, 5 + rng() % 20, 0);
    double max0 = -1e300, min1 = 1e300;
    for (std::size_t i = 0; i < apart.z0.rows(); ++i) {
      double p = 0;
      for (std::size_t j = 0; j < m; ++j) p += apart.z0(i, j) * dir[j] / std::sqrt(norm);
      max0 = std::max(max0, p);
    }
    for (std::size_t i = 0; i < apart.z1.rows(); ++i) {
      double p = 0;
      for (std::size_t j = 0; j < m; ++j) p += apart.z1(i, j) * dir[j] / std::sqrt(norm);
      min1 = std::min(min1, p);
    }
    const double push = std::max(0.0, max0 - min1) + 0.5;
    for (std::size_t i = 0; i < apart.z1.rows(); ++i)
      for (std::size_t j = 0; j < m; ++j) apart.z1(i, j) += push * dir[j] / std::sqrt(norm);
    worst_apart = std::min({worst_apart, estimate_sipm(apart, o), grid_oracle_sipm(apart, prop_one_grid(m))});
  }
  return check(worst_same == 0.0 && worst_apart > 0.5,
               fmt("grid step 0.05 (m=1) / 0.5 (m=2); identical max %.3g (need exactly 0); disjoint min %.4f (need > 0.5)", worst_same, worst_apart));
}

// ---------------------------------------------------------------- 3
Outcome oracle_equivalence() {
  Rng rng(derive_seed(3, 0));
  double worst = 1e9;
  for (int k = 0; k < 25; ++k) {
    const std::size_t m = 1 + k % 2;
    const std::size_t n0 = 5 + rng() % 21, n1 = 5 + rng() % 21;
    const GroupedBatch b = gaussian_batch(rng, m, n0, n1, uniform(rng, 0.0, 1.5));
    SipmOptions o;  // 16 restarts x 200 steps
    o.seed = static_cast<std::uint64_t>(k);
    const double est = estimate_sipm(b, o);
    const double grid = grid_oracle_sipm(b, GridSpec{});  // step 0.05 over [-20, 20]
    worst = std::min(worst, grid > 0 ? est / grid : 1.0);
  }
  return check(worst >= 0.95, fmt("min estimate / grid oracle = %.4f (need >= 0.95)", worst));
}

// ---------------------------------------------------------------- 4
Outcome univariate_witness() {
  Rng rng(derive_seed(4, 0));
  double worst_res = 0, worst_bound = 0;
  for (int r = 2; r <= kMaxWitnessDegree; ++r) {
    for (int r1 = 1; r1 < r; ++r1) {
      const MomentWitness w = vandermonde_witness(r1, r - r1);
      for (int k = 0; k < 100; ++k) {
        worst_res = std::max(worst_res, witness_residual(w, uniform(rng, -2, 2), uniform(rng, -2, 2)));
      }
      worst_bound = std::max(worst_bound, w.abs_sum() / std::exp(r));
    }
  }
  const MomentWitness one = vandermonde_witness(1, 1);
  const auto ref = oracle::witness_betas(1, 1);
  double dev = 0;
  const double expect[] = {-0.25, 0.0, 0.25};
  for (std::size_t i = 0; i < 3; ++i) dev = std::max({dev, std::abs(one.betas[i] - ref[i]), std::abs(ref[i] - expect[i])});
  return check(worst_res < 1e-8 && worst_bound < 1 && dev < 1e-15,
               fmt("max residual %.2e (< 1e-8); max sum|b|/e^r %.3f (< 1); (1,1) deviation from linear solve %.1e",
                   worst_res, worst_bound, dev));
}

// ---------------------------------------------------------------- 5
Outcome multivariate_witness_check() {
  Rng rng(derive_seed(5, 0));
  double worst_res = 0, worst_bound = 0;
  std::size_t cases = 0;
  // every exponent vector with u = 2..4 parts and total degree <= 8 (includes the all-ones vectors)
  std::function<void(std::vector<int>&, int)> walk = [&](std::vector<int>& e, int left) {
    if (e.size() >= 2) {
      const MultiWitness w = multivariate_witness(e);
      int r = 0;
      for (int v : e) r += v;
      worst_bound = std::max(worst_bound, w.abs_sum() / std::exp((e.size() - 1.0) * r));
      for (int k = 0; k < 50; ++k) {
        std::vector<double> z(e.size());
        for (auto& v : z) v = uniform(rng, -1.5, 1.5);
        worst_res = std::max(worst_res, witness_residual(w, z));
      }
      ++cases;
    }
    if (e.size() == kMaxMultiVars) return;
    for (int v = 1; v <= left; ++v) {
      e.push_back(v);
      walk(e, left - v);
      e.pop_back();
    }
  };
  std::vector<int> e;
  walk(e, kMaxMultiDegree);
  return check(worst_res < 1e-6 && worst_bound <= 1,
               fmt("%zu exponent vectors; max residual %.2e (< 1e-6); max sum|b|/e^((u-1)r) %.3g (<= 1)", cases,
                   worst_res, worst_bound));
}

// ---------------------------------------------------------------- 6
Outcome supervised_trend() {
  SynthSpec spec;  // delta 1, d 4, n 8000
  const SyntheticData sd = generate_synthetic(spec);
  TrainConfig c;
  c.m = 8;
  c.seed = 0;
  SweepOptions o;
  o.selection = Selection::last_epoch;
  const std::vector<double> grid{0, 0.1, 1, 10, 100};
  const auto pts = sweep(sd.data, c, grid, o);
  std::string detail = fmt("truth dDP %.3f; test dDP/dMDP:", sd.truth.bayes_dp);
  std::vector<double> mdp;
  for (const auto& p : pts) {
    if (!p.error.empty()) return check(false, "run failed: " + p.error);
    detail += fmt(" %g:%.4f/%.4f", p.lambda, p.heads[0].test.delta_dp, p.heads[0].test.delta_mdp);
    mdp.push_back(p.heads[0].test.delta_mdp);
  }
  int inversions = 0;
  for (std::size_t k = 1; k < mdp.size(); ++k) inversions += mdp[k] > mdp[k - 1];
  const double dp0 = pts.front().heads[0].test.delta_dp, dp100 = pts.back().heads[0].test.delta_dp;
  detail += fmt("; MDP inversions %d", inversions);
  return check(dp100 < 0.05 && dp0 > 0.3 && sd.truth.bayes_dp > 0.3 && inversions <= 1, detail);
}

// ---------------------------------------------------------------- 7
Outcome unsupervised_heads() {
  SynthSpec spec;
  const Dataset d = standardize(generate_synthetic(spec).data);
  TrainConfig c;
  c.mode = TrainMode::unsup;
  c.epochs = kUnsupervisedEpochs;
  c.m = 8;
  SweepOptions o;
  o.heads.assign(std::begin(kAllHeads), std::end(kAllHeads));
  const std::vector<double> grid{0, 100};
  const auto pts = sweep(d, c, grid, o);
  bool ok = true;
  std::string detail = "test dDP lambda 0 -> 100:";
  for (const auto& p : pts)
    if (!p.error.empty()) return check(false, "run failed: " + p.error);
  for (std::size_t h = 0; h < pts[0].heads.size(); ++h) {
    const double a = pts[0].heads[h].test.delta_dp, b = pts[1].heads[h].test.delta_dp;
    ok = ok && b < a;
    detail += fmt(" %s %.4f->%.4f", std::string(to_string(pts[0].heads[h].arch)).c_str(), a, b);
  }
  return check(ok, detail);
}

// ---------------------------------------------------------------- 8
Outcome metric_fixtures() {
  const double l02 = std::log(0.2 / 0.8), l08 = std::log(0.8 / 0.2);
  const double dp = delta_dp({{1, -1, 1, 1}, {0, 0, 1, 1}, {}});
  const double mdp = delta_mdp({{0.2, 0.4, 0.5, 0.5}, {0, 0, 1, 1}, {}}, Squash::identity);
  const double sdp = delta_sdp({{l02, l08}, {0, 1}, {}});
  const double vdp = delta_vdp({{0, 2, 1, 1}, {0, 0, 1, 1}, {}});
  const double err = std::max({std::abs(dp - 0.5), std::abs(mdp - 0.2), std::abs(sdp - 60.0 / 99), std::abs(vdp - 1)});
  return check(err <= 1e-12, fmt("dDP %.15g dMDP %.15g dSDP %.15g dVDP %.15g; max err %.1e", dp, mdp, sdp, vdp, err));
}

// ---------------------------------------------------------------- 9
int run_cli(const std::string& args) {
  const std::string cmd = std::string(FAIRREP_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// relative path -> bytes for every file under dir
std::vector<std::pair<std::string, std::string>> tree(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), dir).string(), slurp(e.path()));
  std::sort(out.begin(), out.end());
  return out;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("fairrep_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::vector<std::string> commands = {
      "synth --n 1500 --truth-draws 20000 --seed 9",
      "train --mode sup --lambda 1 --epochs 20 --m 8 --seed 3",
      "train --mode unsup --lambda 10 --epochs 10 --downstream-epochs 10 --m 8 --seed 3",
      "sweep --lambdas 0,1,10 --epochs 10 --m 8",
      "sweep --mode unsup --lambdas 0,10 --heads linear,sigmoid2 --epochs 5 --downstream-epochs 5 --m 8",
      "verify --quick --seed 1",
  };
  std::size_t files = 0;
  std::string failed;
  std::string data;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    std::string args = commands[k];
    if (k > 0 && k < 5) args += " --data " + data;
    std::vector<std::vector<std::pair<std::string, std::string>>> runs;
    for (const char* rep : {"a", "b"}) {
      const fs::path out = root / rep / std::to_string(k);
      if (run_cli(args + " --out-root " + out.string()) != 0) failed += " [exit " + commands[k] + "]";
      runs.push_back(fs::exists(out) ? tree(out) : decltype(tree(out)){});
      if (k == 0 && data.empty()) {
        for (const auto& e : fs::directory_iterator(out)) data = (e.path() / "dataset.bin").string();
      }
    }
    if (runs[0].empty() || runs[0] != runs[1]) failed += " [" + commands[k] + "]";
    files += runs[0].size();
  }
  fs::remove_all(root);
  return check(failed.empty(), fmt("%zu output files compared across 6 commands", files) +
                                   (failed.empty() ? "" : "; differing:" + failed));
}

// ---------------------------------------------------------------- 10
Outcome adult_integration() {
  const char* dir = std::getenv("FAIRREP_ADULT_DIR");
  if (!dir) return {Verdict::skip, "set FAIRREP_ADULT_DIR to a directory holding adult.data and adult.test"};
  const fs::path train_csv = fs::path(dir) / "adult.data", test_csv = fs::path(dir) / "adult.test";
  if (!fs::exists(train_csv) || !fs::exists(test_csv)) {
    return {Verdict::skip, "adult.data / adult.test not found in " + std::string(dir)};
  }
  const PreprocessSpec spec = builtin_preprocess_spec("adult");
  RawTable t = load_csv(train_csv, spec.csv);
  RawTable test = load_csv(test_csv, spec.csv);
  std::fill(test.from_test_file.begin(), test.from_test_file.end(), true);
  t.append(test);
  SplitScheme sc;
  sc.kind = SplitScheme::Kind::fixed_test;
  const Dataset d = split(preprocess(t, spec), sc, 0);
  const std::size_t ntr = d.count(Split::train), nva = d.count(Split::val), nte = d.count(Split::test);
  std::string detail = fmt("d=%zu (112) sizes %zu/%zu/%zu (24130/6032/15060)", d.dim(), ntr, nva, nte);
  bool ok = d.dim() == 112 && ntr == 24130 && nva == 6032 && nte == 15060;

  TrainConfig c;
  c.seed = 0;
  const std::vector<double> grid{0, 0.1, 1, 10, 100};
  const auto pts = sweep(d, c, grid);
  std::vector<ParetoPoint> front_in;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (!pts[k].error.empty()) return check(false, detail + "; run failed: " + pts[k].error);
    front_in.push_back({pts[k].heads[0].test.delta_dp, pts[k].heads[0].test.acc, k});
  }
  const auto front = pareto_front(front_in);
  const auto& best = front.front();  // minimum dDP on the front
  const auto& base = pts.front().heads[0].test;
  const bool trend = best.fairness < 0.25 * base.delta_dp && base.acc - best.acc <= 0.03;
  detail += fmt("; lambda 0 dDP %.4f acc %.4f; front min dDP %.4f acc %.4f", base.delta_dp, base.acc, best.fairness,
                best.acc);
  return check(ok && trend, detail);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "gradient correctness", gradients},
      {2, "identical groups give zero, disjoint supports exceed 0.5", proposition_one},
      {3, "ascent estimator vs grid oracle", oracle_equivalence},
      {4, "univariate moment witness", univariate_witness},
      {5, "multivariate moment witness", multivariate_witness_check},
      {6, "supervised fairness trend on synthetic data", supervised_trend},
      {7, "unsupervised representations across four heads", unsupervised_heads},
      {8, "metric fixtures", metric_fixtures},
      {9, "byte-identical reruns", determinism},
      {10, "Adult integration (optional)", adult_integration},
  };
  int failures = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Verdict::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::fail ? "FAIL" : "SKIP";
    failures += o.verdict == Verdict::fail;
    std::printf("%s %2d %s (%.1fs): %s\n", tag, c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
