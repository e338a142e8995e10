// fairrep command-line front end.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairrep/data.hpp"
#include "fairrep/error.hpp"
#include "fairrep/io.hpp"
#include "fairrep/metrics.hpp"
#include "fairrep/synth.hpp"
#include "fairrep/theory.hpp"
#include "fairrep/train.hpp"

namespace fs = std::filesystem;
using fairrep::InputError;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUser = 2;

struct DataOptions {
  std::string cache;
  std::string csv;
  std::string test_csv;
  std::string preprocess;
  std::string standardize = "auto";

  void add(CLI::App* app) {
    app->add_option("--data", cache, "dataset cache written by `synth`");
    app->add_option("--csv", csv, "raw CSV file");
    app->add_option("--test-csv", test_csv, "separate test CSV (keeps its rows as the test split)");
    app->add_option("--preprocess", preprocess, "built-in spec name (adult, compas) or a TOML spec file");
    app->add_option("--standardize", standardize, "auto (unsupervised only), on or off")
        ->check(CLI::IsMember({"auto", "on", "off"}));
  }

  ordered_json json() const {
    ordered_json j;
    j["data"] = cache.empty() ? "" : fs::absolute(cache).lexically_normal().string();
    j["csv"] = csv.empty() ? "" : fs::absolute(csv).lexically_normal().string();
    j["test_csv"] = test_csv.empty() ? "" : fs::absolute(test_csv).lexically_normal().string();
    j["preprocess"] = preprocess;
    j["standardize"] = standardize;
    return j;
  }
};

struct TrainOptions {
  std::string mode = "sup";
  double lambda = 0.0;
  std::optional<std::size_t> epochs;
  std::size_t t_adv = 2;
  std::size_t batch_size = 512;
  double lr = 2.0;
  double lr_adv = 0.5;
  std::string optimizer = "adadelta";
  std::string adversary_optimizer = "adam";
  bool plain_adversary = false;
  std::string adversary_reset = "per_batch";
  std::string target = "dp";
  bool include_s = true;
  std::uint64_t seed = 0;
  std::size_t m = 60;
  std::string head = "leakyrelu1";
  std::size_t hidden = 0;
  std::string selection;
  std::size_t downstream_epochs = fairrep::kDownstreamEpochs;

  void add(CLI::App* app) {
    app->add_option("--mode", mode, "sup or unsup")->check(CLI::IsMember({"sup", "unsup"}));
    app->add_option("--lambda", lambda, "fairness weight");
    app->add_option("--epochs", epochs, "epochs (default 400 sup, 300 unsup)");
    app->add_option("--t-adv", t_adv, "discriminator ascent steps per minibatch");
    app->add_option("--batch-size", batch_size);
    app->add_option("--lr", lr, "descent learning rate");
    app->add_option("--lr-adv", lr_adv, "discriminator learning rate");
    app->add_option("--optimizer", optimizer, "adadelta, adam or sgd");
    app->add_option("--adversary-optimizer", adversary_optimizer, "adadelta, adam or sgd");
    app->add_flag("--plain-adversary", plain_adversary, "plain gradient ascent for the discriminators");
    app->add_option("--adversary-reset", adversary_reset, "per_batch or persistent");
    app->add_option("--target", target, "dp, eopp or eo");
    app->add_option("--include-s", include_s, "feed the sensitive attribute to the encoder");
    app->add_option("--seed", seed);
    app->add_option("--m", m, "representation dimension");
    app->add_option("--head", head, "linear, leakyrelu1, sigmoid1 or sigmoid2");
    app->add_option("--hidden", hidden, "hidden width of the heads (0 = m)");
    app->add_option("--selection", selection, "acc_minus_dp, min_val_loss or last_epoch");
    app->add_option("--downstream-epochs", downstream_epochs);
  }

  fairrep::TrainConfig resolve() const {
    fairrep::TrainConfig c;
    c.mode = fairrep::parse_train_mode(mode);
    c.lambda = lambda;
    c.epochs = epochs.value_or(c.mode == fairrep::TrainMode::sup ? fairrep::kSupervisedEpochs
                                                                 : fairrep::kUnsupervisedEpochs);
    c.t_adv = t_adv;
    c.batch_size = batch_size;
    c.lr = lr;
    c.lr_adv = lr_adv;
    c.optimizer.kind = fairrep::parse_optimizer_kind(optimizer);
    if (c.optimizer.kind == fairrep::OptimizerKind::adam) c.optimizer.eps = 1e-8;
    c.adversary_optimizer.kind = fairrep::parse_optimizer_kind(adversary_optimizer);
    c.adversary_optimizer.eps = c.adversary_optimizer.kind == fairrep::OptimizerKind::adam ? 1e-8 : 1e-6;
    c.adversary_uses_optimizer = !plain_adversary;
    c.adversary_reset = fairrep::parse_adversary_reset(adversary_reset);
    c.target = fairrep::parse_fairness_target(target);
    c.include_s = include_s;
    c.seed = seed;
    c.m = m;
    c.head = fairrep::parse_head_arch(head);
    c.hidden = hidden;
    c.validate();
    return c;
  }

  fairrep::Selection resolve_selection(fairrep::TrainMode mode_) const {
    if (!selection.empty()) return fairrep::parse_selection(selection);
    return mode_ == fairrep::TrainMode::sup ? fairrep::Selection::acc_minus_dp : fairrep::Selection::min_val_loss;
  }
};

struct OutputOptions {
  std::string root = "runs";
  bool force = false;

  void add(CLI::App* app) {
    app->add_option("--out-root", root, "parent directory of run directories");
    app->add_flag("--force", force, "overwrite an existing run directory");
  }

  // <root>/<command>-<hash of the resolved config>
  fs::path prepare(const std::string& command, const ordered_json& resolved) const {
    const std::string text = resolved.dump();
    const fs::path dir = fs::path(root) / (command + "-" + fairrep::hex64(fairrep::fnv1a64(text)).substr(0, 12));
    if (fs::exists(dir)) {
      if (!force) throw InputError("run directory '" + dir.string() + "' already exists (use --force to overwrite)");
      fs::remove_all(dir);
    }
    fs::create_directories(dir);
    fairrep::write_text_file(dir / "config.json", resolved.dump(2) + "\n");
    return dir;
  }
};

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw InputError(std::string(what) + " '" + path + "' does not exist");
}

fairrep::Dataset load_data(const DataOptions& d, fairrep::TrainMode mode, std::uint64_t seed) {
  fairrep::Dataset data;
  if (!d.cache.empty() && !d.csv.empty()) throw InputError("give either --data or --csv, not both");
  if (!d.cache.empty()) {
    require_file(d.cache, "dataset cache");
    data = fairrep::load_dataset(d.cache);
  } else if (!d.csv.empty()) {
    require_file(d.csv, "CSV file");
    if (d.preprocess.empty()) throw InputError("--csv needs --preprocess (adult, compas or a TOML file)");
    const fairrep::PreprocessSpec spec = fs::is_regular_file(d.preprocess)
                                             ? fairrep::load_preprocess_spec(d.preprocess)
                                             : fairrep::builtin_preprocess_spec(d.preprocess);
    fairrep::RawTable table = fairrep::load_csv(d.csv, spec.csv);
    fairrep::SplitScheme scheme;
    if (!d.test_csv.empty()) {
      require_file(d.test_csv, "test CSV file");
      fairrep::RawTable test = fairrep::load_csv(d.test_csv, spec.csv);
      std::fill(test.from_test_file.begin(), test.from_test_file.end(), true);
      table.append(test);
      scheme.kind = fairrep::SplitScheme::Kind::fixed_test;
    }
    fairrep::PreprocessLog log;
    data = fairrep::split(fairrep::preprocess(table, spec, &log), scheme, seed);
    std::cerr << "preprocess: dropped " << log.dropped_missing << " rows with missing cells, "
              << log.dropped_by_filters << " by filters; d = " << data.dim() << "\n";
  } else {
    throw InputError("no dataset given (use --data or --csv)");
  }
  const bool standardize = d.standardize == "on" || (d.standardize == "auto" && mode == fairrep::TrainMode::unsup);
  if (standardize && !data.standardization) {
    data = fairrep::standardize(std::move(data));
    for (const auto& name : data.standardization->dropped_constant) {
      std::cerr << "standardize: dropped constant feature '" << name << "'\n";
    }
  }
  return data;
}

std::string reports_csv(const std::vector<std::pair<std::string, fairrep::FairnessReport>>& rows) {
  std::string out = "split," + fairrep::report_csv_header() + "\n";
  for (const auto& [name, r] : rows) out += name + "," + fairrep::report_csv_row(r) + "\n";
  return out;
}

fairrep::FairnessReport evaluate_split(const fairrep::EncoderParams& enc, const fairrep::HeadParams& head,
                                       const fairrep::Dataset& data, fairrep::Split which) {
  if (data.count(which) == 0) return {};
  return fairrep::evaluate(fairrep::score_split(enc, head, data, which));
}

void write_reports(const fs::path& dir, const std::string& stem, const fairrep::EncoderParams& enc,
                   const fairrep::HeadParams& head, const fairrep::Dataset& data) {
  const auto val = evaluate_split(enc, head, data, fairrep::Split::val);
  const auto test = evaluate_split(enc, head, data, fairrep::Split::test);
  fairrep::write_text_file(dir / (stem + ".json"), fairrep::report_json(test));
  fairrep::write_text_file(dir / (stem + "_val.json"), fairrep::report_json(val));
  fairrep::write_text_file(dir / (stem + ".csv"), reports_csv({{"val", val}, {"test", test}}));
}

double pick_metric(const fairrep::FairnessReport& r, const std::string& metric) {
  if (metric == "dp") return r.delta_dp;
  if (metric == "mdp") return r.delta_mdp;
  if (metric == "sdp") return r.delta_sdp;
  if (metric == "vdp") return r.delta_vdp;
  if (metric == "eopp") return r.eopp;
  if (metric == "eo") return r.eo;
  throw InputError("unknown fairness metric '" + metric + "'");
}

std::vector<fairrep::HeadArch> parse_heads(const std::vector<std::string>& names) {
  std::vector<fairrep::HeadArch> out;
  for (const auto& n : names) out.push_back(fairrep::parse_head_arch(n));
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// ------------------------------------------------------------------ commands

int cmd_train(const DataOptions& d, const TrainOptions& t, const OutputOptions& o) {
  const fairrep::TrainConfig cfg = t.resolve();
  const fairrep::Selection sel = t.resolve_selection(cfg.mode);
  ordered_json resolved;
  resolved["command"] = "train";
  resolved["data"] = d.json();
  resolved["train"] = ordered_json::parse(fairrep::train_config_json(cfg));
  resolved["selection"] = std::string(fairrep::to_string(sel));
  resolved["downstream_epochs"] = t.downstream_epochs;
  const fairrep::Dataset data = load_data(d, cfg.mode, cfg.seed);
  const fs::path dir = o.prepare("train", resolved);

  fairrep::Checkpoint ckpt;
  ckpt.config = cfg;
  if (cfg.mode == fairrep::TrainMode::sup) {
    fairrep::SupervisedResult r = fairrep::train_supervised(data, cfg);
    const auto choice = fairrep::select_checkpoint(r.history, sel);
    std::vector<fairrep::ParamBlock*> bs = fairrep::blocks(r.encoder);
    for (auto* b : fairrep::blocks(r.head)) bs.push_back(b);
    fairrep::restore(*choice.snapshot, bs);
    ckpt.chosen_epoch = choice.epoch;
    ckpt.encoder = r.encoder;
    ckpt.head = r.head;
    fairrep::write_text_file(dir / "history.csv", fairrep::history_csv(r.history));
    write_reports(dir, "report", r.encoder, r.head, data);
  } else {
    fairrep::UnsupervisedResult r = fairrep::train_unsupervised(data, cfg);
    const auto choice = fairrep::select_checkpoint(r.history, sel);
    std::vector<fairrep::ParamBlock*> bs = fairrep::blocks(r.encoder);
    for (auto* b : fairrep::blocks(r.decoder)) bs.push_back(b);
    fairrep::restore(*choice.snapshot, bs);
    ckpt.chosen_epoch = choice.epoch;
    ckpt.encoder = r.encoder;
    ckpt.decoder = r.decoder;
    fairrep::write_text_file(dir / "history.csv", fairrep::history_csv(r.history));
    fairrep::TrainConfig down = cfg;
    down.mode = fairrep::TrainMode::sup;
    down.epochs = t.downstream_epochs;
    down.keep_snapshots = false;
    const fairrep::DownstreamResult h = fairrep::train_downstream(r.encoder, data, cfg.head, down);
    fairrep::write_text_file(dir / "downstream_history.csv", fairrep::history_csv(h.history));
    write_reports(dir, "report", r.encoder, h.head, data);
  }
  fairrep::save_checkpoint(ckpt, dir / "checkpoint.json");
  std::cout << "epoch " << ckpt.chosen_epoch << " selected\nwrote " << dir.string() << "\n";
  return kExitOk;
}

int cmd_sweep(const DataOptions& d, const TrainOptions& t, const OutputOptions& o, const std::vector<double>& lambdas,
              const std::vector<std::string>& head_names, const std::string& metric) {
  const fairrep::TrainConfig cfg = t.resolve();
  const std::vector<double> grid = fairrep::normalize_lambdas(lambdas);
  fairrep::SweepOptions opts;
  opts.heads = parse_heads(head_names);
  opts.downstream_epochs = t.downstream_epochs;
  opts.selection = t.resolve_selection(cfg.mode);
  pick_metric({}, metric);

  ordered_json resolved;
  resolved["command"] = "sweep";
  resolved["data"] = d.json();
  resolved["train"] = ordered_json::parse(fairrep::train_config_json(cfg));
  resolved["lambdas"] = grid;
  resolved["heads"] = head_names;
  resolved["selection"] = std::string(fairrep::to_string(*opts.selection));
  resolved["downstream_epochs"] = t.downstream_epochs;
  resolved["metric"] = metric;
  const fairrep::Dataset data = load_data(d, cfg.mode, cfg.seed);
  const fs::path dir = o.prepare("sweep", resolved);

  const std::vector<fairrep::SweepPoint> points = fairrep::sweep(data, cfg, grid, opts);
  std::string table = "lambda,seed,epoch,head," + fairrep::report_csv_header() + ",error\n";
  std::map<std::string, std::vector<fairrep::ParetoPoint>> by_head;
  std::vector<std::pair<std::size_t, std::size_t>> tags;  // (point, head) per pareto tag
  std::size_t failed = 0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& p = points[k];
    const fs::path run = dir / ("lambda-" + std::to_string(k));
    fs::create_directories(run);
    if (!p.error.empty()) {
      ++failed;
      fairrep::write_text_file(run / "error.txt", p.error + "\n");
      table += fmt(p.lambda) + "," + std::to_string(p.seed) + ",,,,,,,,,,\"" + p.error + "\"\n";
      std::cerr << "lambda " << p.lambda << " failed: " << p.error << "\n";
      continue;
    }
    fairrep::write_text_file(run / "history.csv", fairrep::history_csv(p.history));
    for (std::size_t h = 0; h < p.heads.size(); ++h) {
      const auto& hr = p.heads[h];
      const std::string arch(fairrep::to_string(hr.arch));
      fairrep::write_text_file(run / ("report_" + arch + ".json"), fairrep::report_json(hr.test));
      fairrep::write_text_file(run / ("report_" + arch + "_val.json"), fairrep::report_json(hr.val));
      table += fmt(p.lambda) + "," + std::to_string(p.seed) + "," + std::to_string(p.chosen_epoch) + "," + arch +
               "," + fairrep::report_csv_row(hr.test) + ",\n";
      by_head[arch].push_back({pick_metric(hr.test, metric), hr.test.acc, tags.size()});
      tags.emplace_back(k, h);
    }
  }
  fairrep::write_text_file(dir / "sweep.csv", table);
  std::string pareto = "head,lambda,seed," + metric + ",acc\n";
  for (const auto& [arch, pts] : by_head) {
    for (const auto& f : fairrep::pareto_front(pts)) {
      const auto& p = points[tags[f.tag].first];
      pareto += arch + "," + fmt(p.lambda) + "," + std::to_string(p.seed) + "," + fmt(f.fairness) + "," +
                fmt(f.acc) + "\n";
    }
  }
  fairrep::write_text_file(dir / "pareto.csv", pareto);
  std::cout << points.size() - failed << " of " << points.size() << " runs finished\nwrote " << dir.string() << "\n";
  return kExitOk;
}

int cmd_downstream(const DataOptions& d, const TrainOptions& t, const OutputOptions& o, const std::string& checkpoint,
                   const std::vector<std::string>& head_names) {
  require_file(checkpoint, "checkpoint");
  const std::vector<fairrep::HeadArch> heads = parse_heads(head_names);
  if (heads.empty()) throw InputError("--heads needs at least one architecture");
  const fairrep::Checkpoint ckpt = fairrep::load_checkpoint(checkpoint);
  fairrep::TrainConfig cfg = t.resolve();
  cfg.mode = fairrep::TrainMode::sup;
  cfg.epochs = t.epochs.value_or(fairrep::kDownstreamEpochs);
  cfg.keep_snapshots = false;

  ordered_json resolved;
  resolved["command"] = "downstream";
  resolved["data"] = d.json();
  resolved["checkpoint_hash"] = fairrep::hex64(fairrep::fnv1a64(fairrep::read_text_file(checkpoint)));
  resolved["train"] = ordered_json::parse(fairrep::train_config_json(cfg));
  resolved["heads"] = head_names;
  const fairrep::Dataset data = load_data(d, ckpt.config.mode, cfg.seed);
  const fs::path dir = o.prepare("downstream", resolved);
  for (fairrep::HeadArch a : heads) {
    const fairrep::DownstreamResult r = fairrep::train_downstream(ckpt.encoder, data, a, cfg);
    const std::string arch(fairrep::to_string(a));
    fairrep::write_text_file(dir / ("history_" + arch + ".csv"), fairrep::history_csv(r.history));
    write_reports(dir, "report_" + arch, ckpt.encoder, r.head, data);
  }
  std::cout << "wrote " << dir.string() << "\n";
  return kExitOk;
}

int cmd_verify(const OutputOptions& o, std::uint64_t seed, bool quick, bool inject) {
  ordered_json resolved;
  resolved["command"] = "verify";
  resolved["seed"] = seed;
  resolved["quick"] = quick;
  resolved["inject_failure"] = inject;
  const fs::path dir = o.prepare("verify", resolved);
  const auto results = fairrep::verify_suite({.seed = seed, .inject_failure = inject, .quick = quick});
  fairrep::write_text_file(dir / "verify.json", fairrep::verify_report_json(results));
  std::size_t failed = 0;
  for (const auto& r : results) {
    if (r.passed) continue;
    ++failed;
    std::cout << "FAIL " << r.check_id << " measured=" << r.measured << " threshold=" << r.threshold << "\n";
  }
  std::cout << results.size() - failed << " of " << results.size() << " checks passed\nwrote " << dir.string()
            << "\n";
  return failed ? kExitFailed : kExitOk;
}

int cmd_synth(const OutputOptions& o, fairrep::SynthSpec spec, std::size_t draws) {
  spec.validate();
  ordered_json resolved;
  resolved["command"] = "synth";
  resolved["n"] = spec.n;
  resolved["d"] = spec.d;
  resolved["delta"] = spec.group_shift;
  resolved["weights"] = spec.weights();
  resolved["bias_s"] = spec.bias_s;
  resolved["seed"] = spec.seed;
  resolved["test_fraction"] = spec.test_fraction;
  resolved["val_fraction"] = spec.val_fraction;
  resolved["truth_draws"] = draws;
  const fs::path dir = o.prepare("synth", resolved);
  const fairrep::SyntheticData sd = fairrep::generate_synthetic(spec, draws);
  fairrep::save_dataset(sd.data, dir / "dataset.bin");
  ordered_json truth;
  truth["draws"] = sd.truth.draws;
  truth["bayes_dp"] = sd.truth.bayes_dp;
  truth["bayes_rate0"] = sd.truth.bayes_rate0;
  truth["bayes_rate1"] = sd.truth.bayes_rate1;
  truth["bayes_acc"] = sd.truth.bayes_acc;
  truth["label_rate0"] = sd.truth.label_rate0;
  truth["label_rate1"] = sd.truth.label_rate1;
  truth["train"] = sd.data.count(fairrep::Split::train);
  truth["val"] = sd.data.count(fairrep::Split::val);
  truth["test"] = sd.data.count(fairrep::Split::test);
  fairrep::write_text_file(dir / "truth.json", truth.dump(2) + "\n");
  std::cout << "bayes dDP " << sd.truth.bayes_dp << "\nwrote " << (dir / "dataset.bin").string() << "\n";
  return kExitOk;
}

// Collects report.json / report_<arch>.json files under the given run directories.
int cmd_report(const std::vector<std::string>& dirs, const std::string& metric, bool pareto_only) {
  pick_metric({}, metric);
  struct Row {
    std::string source;
    fairrep::FairnessReport r;
  };
  std::vector<Row> rows;
  for (const auto& d : dirs) {
    if (!fs::is_directory(d)) throw InputError("run directory '" + d + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(d)) {
      const std::string name = e.path().filename().string();
      if (e.is_regular_file() && name.rfind("report", 0) == 0 && e.path().extension() == ".json" &&
          name.find("_val") == std::string::npos) {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) rows.push_back({f.string(), fairrep::report_from_json(fairrep::read_text_file(f))});
  }
  if (rows.empty()) throw InputError("no report files found");
  std::vector<std::size_t> keep(rows.size());
  std::iota(keep.begin(), keep.end(), std::size_t{0});
  if (pareto_only) {
    std::vector<fairrep::ParetoPoint> pts;
    for (std::size_t k = 0; k < rows.size(); ++k) pts.push_back({pick_metric(rows[k].r, metric), rows[k].r.acc, k});
    keep.clear();
    for (const auto& p : fairrep::pareto_front(pts)) keep.push_back(p.tag);
  }
  std::cout << "source," << fairrep::report_csv_header() << "\n";
  for (std::size_t k : keep) std::cout << rows[k].source << "," << fairrep::report_csv_row(rows[k].r) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fair representation learning with a sigmoid-IPM adversary"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");

  DataOptions data;
  TrainOptions train;
  OutputOptions out;

  auto* train_cmd = app.add_subcommand("train", "train an encoder (and head) and write a checkpoint + reports");
  data.add(train_cmd);
  train.add(train_cmd);
  out.add(train_cmd);

  std::vector<double> lambdas;
  std::vector<std::string> heads;
  std::string metric = "dp";
  auto* sweep_cmd = app.add_subcommand("sweep", "one run per lambda, plus pareto.csv");
  data.add(sweep_cmd);
  train.add(sweep_cmd);
  out.add(sweep_cmd);
  sweep_cmd->add_option("--lambdas", lambdas, "lambda grid")->required()->delimiter(',');
  sweep_cmd->add_option("--heads", heads, "downstream heads (unsupervised)")->delimiter(',');
  sweep_cmd->add_option("--metric", metric, "fairness column of pareto.csv: dp, mdp, sdp, vdp, eopp, eo");

  std::string checkpoint;
  auto* down_cmd = app.add_subcommand("downstream", "train heads on a frozen encoder");
  data.add(down_cmd);
  train.add(down_cmd);
  out.add(down_cmd);
  down_cmd->add_option("--checkpoint", checkpoint, "checkpoint.json from `train`")->required();
  down_cmd->add_option("--heads", heads, "linear, leakyrelu1, sigmoid1, sigmoid2")->required()->delimiter(',');

  std::uint64_t verify_seed = 0;
  bool quick = false;
  bool inject = false;
  auto* verify_cmd = app.add_subcommand("verify", "run the witness and estimator checks");
  verify_cmd->add_option("--seed", verify_seed);
  verify_cmd->add_flag("--quick", quick, "smaller Monte-Carlo samples");
  verify_cmd->add_flag("--inject-failure", inject, "corrupt one witness coefficient (test hook)")
      ->group("");
  out.add(verify_cmd);

  fairrep::SynthSpec spec;
  std::size_t draws = 1'000'000;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset cache and its ground truth");
  synth_cmd->add_option("--n", spec.n);
  synth_cmd->add_option("--d", spec.d);
  synth_cmd->add_option("--delta", spec.group_shift, "group mean shift");
  synth_cmd->add_option("--weights", spec.label_weights, "label weights (default all ones)")->delimiter(',');
  synth_cmd->add_option("--bias-s", spec.bias_s, "label bias of the sensitive group");
  synth_cmd->add_option("--seed", spec.seed);
  synth_cmd->add_option("--test-fraction", spec.test_fraction);
  synth_cmd->add_option("--val-fraction", spec.val_fraction);
  synth_cmd->add_option("--truth-draws", draws, "Monte-Carlo draws for the ground truth");
  out.add(synth_cmd);

  std::vector<std::string> report_dirs;
  bool pareto_only = false;
  auto* report_cmd = app.add_subcommand("report", "collect reports from run directories");
  report_cmd->add_option("dirs", report_dirs, "run directories")->required();
  report_cmd->add_option("--metric", metric, "fairness metric for --pareto");
  report_cmd->add_flag("--pareto", pareto_only, "only the non-dominated reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUser;
  }

  try {
    if (*train_cmd) return cmd_train(data, train, out);
    if (*sweep_cmd) return cmd_sweep(data, train, out, lambdas, heads, metric);
    if (*down_cmd) return cmd_downstream(data, train, out, checkpoint, heads);
    if (*verify_cmd) return cmd_verify(out, verify_seed, quick, inject);
    if (*synth_cmd) return cmd_synth(out, spec, draws);
    if (*report_cmd) return cmd_report(report_dirs, metric, pareto_only);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const fairrep::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitOk;
}
