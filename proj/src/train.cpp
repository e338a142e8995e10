#include "fairrep/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fairrep/error.hpp"
#include "fairrep/random.hpp"

namespace fairrep {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum Stream : std::uint64_t { kEncoder = 1, kHead = 2, kDecoder = 3, kPsi = 4, kShuffle = 5, kDownstream = 6 };

BinaryVector pick(std::span<const std::uint8_t> v, std::span<const std::size_t> rows) {
  BinaryVector out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = v[rows[i]];
  return out;
}

// The discriminator part of the fair term on the tape: |mean_0 sigma - mean_1 sigma|
// with (theta, mu) held fixed.
Tape::Var tape_gap(Tape& tape, const Discriminator& psi, Tape::Var z, const StratumRows& st) {
  auto theta = tape.constant(Matrix::row_vector(psi.theta));
  auto mu = tape.constant(Matrix(1, 1, psi.mu));
  auto p = tape.sigmoid(tape.affine(theta, mu, z));
  return tape.abs(tape.combine(tape.mean_rows(p, st.rows0), 1.0, tape.mean_rows(p, st.rows1), -1.0));
}

GroupedBatch group(const Matrix& Z, const StratumRows& st) {
  return GroupedBatch{Z.select_rows(st.rows0), Z.select_rows(st.rows1)};
}

struct Split3 {
  std::vector<std::size_t> rows;
  Matrix X;      // raw features
  Matrix input;  // encoder input
  BinaryVector s;
  BinaryVector y;
};

Split3 gather(const Dataset& data, const EncoderParams& enc, Split which) {
  Split3 out;
  out.rows = data.indices(which);
  out.X = data.X.select_rows(out.rows);
  out.s = pick(data.s, out.rows);
  out.y = pick(data.y, out.rows);
  out.input = encoder_input(enc, out.X, out.s);
  return out;
}

// Validation loss (task + lambda * gap), accuracy and DP at the current parameters.
void validate_epoch(EpochRecord& rec, const TrainConfig& cfg, const Split3& val, const EncoderParams& enc,
                    const HeadParams* head, const DecoderParams* dec, const std::vector<Discriminator>& psi) {
  if (val.rows.empty()) {
    rec.val_loss = rec.val_acc = rec.val_dp = kNaN;
    return;
  }
  const Matrix Z = leaky_relu(affine(enc.layer.W.value, enc.layer.b.value.values(), val.input), enc.slope);
  double task = 0.0;
  if (head) {
    const Matrix logits = head_logits(*head, Z);
    task = bce_with_logits(logits.values(), val.y);
    const ScoredBatch sb{logits.values(), val.s, val.y};
    rec.val_acc = accuracy(sb);
    rec.val_dp = delta_dp(sb);
  } else {
    task = squared_error(val.X, decode(*dec, Z));
    rec.val_acc = rec.val_dp = kNaN;
  }
  double gap = 0.0;
  if (!cfg.disable_fair_term) {
    const auto strata = conditional_strata(val.s, val.y, cfg.target);
    for (std::size_t k = 0; k < strata.size(); ++k) {
      if (!strata[k].empty()) gap += fair_gap(psi[k], group(Z, strata[k]));
    }
  }
  rec.val_loss = task + cfg.lambda * gap;
}

TrainHistory run_training(const Dataset& data, const TrainConfig& cfg, EncoderParams& enc, HeadParams* head,
                          DecoderParams* dec, std::vector<Discriminator>& psi) {
  const Split3 tr = gather(data, enc, Split::train);
  const Split3 val = gather(data, enc, Split::val);
  if (tr.rows.size() < 2) throw InputError("training needs at least 2 train rows");

  std::vector<ParamBlock*> trained = blocks(enc);
  for (ParamBlock* b : head ? blocks(*head) : blocks(*dec)) trained.push_back(b);
  for (ParamBlock* b : trained) b->reset_state();
  const OptimizerConfig opt = cfg.descent_optimizer();

  const std::size_t n_strata = cfg.target == FairnessTarget::eo ? 2 : 1;
  psi.clear();
  for (std::size_t k = 0; k < n_strata; ++k) {
    psi.push_back(random_discriminator(enc.dim(), derive_seed(cfg.seed, kPsi), k));
  }

  std::vector<ParamBlock> psi_state;
  for (const auto& d : psi) psi_state.push_back(to_param_block(d));
  OptimizerConfig adv_opt = cfg.adversary_optimizer;
  adv_opt.learning_rate = cfg.lr_adv;

  std::uint64_t draws = n_strata;  // streams 0..n_strata-1 hold the initial draws

  TrainHistory hist;
  Rng shuffle_rng(derive_seed(cfg.seed, kShuffle));
  std::vector<std::size_t> order(tr.rows.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochRecord rec{.epoch = epoch};
    std::size_t n_batches = 0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += cfg.batch_size, ++b) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, stop - start);
      const Matrix Xin = tr.input.select_rows(rows);
      const BinaryVector sb = pick(tr.s, rows);
      const BinaryVector yb = pick(tr.y, rows);
      const auto strata = conditional_strata(sb, yb, cfg.target);

      // Ascent on each discriminator against the current representations.
      std::vector<bool> active(strata.size(), false);
      if (!cfg.disable_fair_term) {
        const Matrix Z = leaky_relu(affine(enc.layer.W.value, enc.layer.b.value.values(), Xin), enc.slope);
        for (std::size_t k = 0; k < strata.size(); ++k) {
          if (strata[k].empty()) {
            ++rec.empty_groups;
            continue;
          }
          active[k] = true;
          const GroupedBatch gb = group(Z, strata[k]);
          if (cfg.adversary_reset == AdversaryReset::per_batch) {
            psi[k] = random_discriminator(enc.dim(), derive_seed(cfg.seed, kPsi), ++draws);
            psi_state[k] = to_param_block(psi[k]);
          }
          for (std::size_t t = 0; t < cfg.t_adv; ++t) {
            if (cfg.adversary_uses_optimizer) {
              ascend(psi_state[k], gb, adv_opt, 1);
              psi[k] = from_param_block(psi_state[k]);
            } else {
              psi[k] = ascend(psi[k], gb, cfg.lr_adv, 1);
            }
            if (cfg.record_steps) {
              hist.steps.push_back({epoch, b, StepEvent::Kind::ascent, k, fair_gap(psi[k], gb)});
            }
          }
        }
      }

      // Descent on task + lambda * fair.
      Tape tape;
      auto in = tape.constant(Xin);
      auto z = encode(tape, enc, in);
      Tape::Var task;
      if (head) {
        task = tape.bce_with_logits(head_logits(tape, *head, z), yb);
      } else {
        task = tape.squared_error(tape.constant(tr.X.select_rows(rows)), decode(tape, *dec, z));
      }
      Tape::Var total = task;
      double fair = 0.0;
      std::optional<Tape::Var> fair_var;
      for (std::size_t k = 0; k < strata.size(); ++k) {
        if (!active[k]) continue;
        auto g = tape_gap(tape, psi[k], z, strata[k]);
        fair_var = fair_var ? tape.combine(*fair_var, 1.0, g, 1.0) : g;
      }
      if (fair_var) {
        fair = tape.scalar(*fair_var);
        total = tape.combine(task, 1.0, *fair_var, cfg.lambda);
      }
      for (ParamBlock* p : trained) p->zero_grad();
      tape.backward(total);
      for (ParamBlock* p : trained) optimizer_step(*p, opt);
      if (cfg.record_steps) hist.steps.push_back({epoch, b, StepEvent::Kind::descent, 0, tape.scalar(total)});

      if (std::any_of(strata.begin(), strata.end(), [](const StratumRows& s) { return s.empty(); })) {
        ++hist.empty_group_batches;
      }
      rec.train_loss += tape.scalar(task);
      rec.fair_loss += fair;
      ++n_batches;
    }
    rec.train_loss /= static_cast<double>(n_batches);
    rec.fair_loss /= static_cast<double>(n_batches);
    validate_epoch(rec, cfg, val, enc, head, dec, psi);
    hist.epochs.push_back(rec);
    if (cfg.keep_snapshots) hist.snapshots.push_back(snapshot_of(trained));
  }
  return hist;
}

}  // namespace

std::string_view to_string(AdversaryReset r) { return r == AdversaryReset::persistent ? "persistent" : "per_batch"; }

AdversaryReset parse_adversary_reset(std::string_view name) {
  if (name == "persistent") return AdversaryReset::persistent;
  if (name == "per_batch") return AdversaryReset::per_batch;
  throw InputError("unknown adversary reset '" + std::string(name) + "' (expected persistent or per_batch)");
}

std::string_view to_string(TrainMode m) { return m == TrainMode::sup ? "sup" : "unsup"; }

TrainMode parse_train_mode(std::string_view name) {
  if (name == "sup" || name == "supervised") return TrainMode::sup;
  if (name == "unsup" || name == "unsupervised") return TrainMode::unsup;
  throw InputError("unknown mode '" + std::string(name) + "' (expected sup or unsup)");
}

std::string_view to_string(Selection s) {
  switch (s) {
    case Selection::acc_minus_dp: return "acc_minus_dp";
    case Selection::min_val_loss: return "min_val_loss";
    case Selection::last_epoch: return "last_epoch";
  }
  return "?";
}

Selection parse_selection(std::string_view name) {
  for (Selection s : {Selection::acc_minus_dp, Selection::min_val_loss, Selection::last_epoch}) {
    if (to_string(s) == name) return s;
  }
  throw InputError("unknown selection '" + std::string(name) + "' (expected acc_minus_dp, min_val_loss or last_epoch)");
}

void TrainConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be a finite value >= 0");
  if (epochs < 1) throw InputError("epochs must be >= 1");
  if (batch_size < 2) throw InputError("batch_size must be >= 2");
  if (m < 1) throw InputError("m must be >= 1");
  if (!(lr > 0.0)) throw InputError("lr must be > 0");
  if (!(lr_adv >= 0.0)) throw InputError("lr_adv must be >= 0");
  descent_optimizer().validate();
  OptimizerConfig adv = adversary_optimizer;
  adv.learning_rate = lr_adv;
  if (adversary_uses_optimizer && lr_adv > 0.0) adv.validate();
}

OptimizerConfig TrainConfig::descent_optimizer() const {
  OptimizerConfig o = optimizer;
  o.learning_rate = lr;
  return o;
}

SupervisedResult train_supervised(const Dataset& data, const TrainConfig& config) {
  config.validate();
  data.validate();
  if (config.mode != TrainMode::sup) throw InputError("train_supervised needs mode = sup");
  SupervisedResult r{make_encoder(data.dim(), config.m, config.include_s, derive_seed(config.seed, kEncoder)),
                     make_head(config.head, config.m, config.hidden, derive_seed(config.seed, kHead)),
                     {},
                     {}};
  r.history = run_training(data, config, r.encoder, &r.head, nullptr, r.discriminators);
  return r;
}

UnsupervisedResult train_unsupervised(const Dataset& data, const TrainConfig& config) {
  config.validate();
  data.validate();
  if (config.mode != TrainMode::unsup) throw InputError("train_unsupervised needs mode = unsup");
  if (config.target != FairnessTarget::dp) {
    throw InputError("unsupervised training uses no labels, so only the dp target is available");
  }
  UnsupervisedResult r{make_encoder(data.dim(), config.m, config.include_s, derive_seed(config.seed, kEncoder)),
                       make_decoder(config.m, data.dim(), derive_seed(config.seed, kDecoder)),
                       {},
                       {}};
  r.history = run_training(data, config, r.encoder, nullptr, &r.decoder, r.discriminators);
  return r;
}

DownstreamResult train_downstream(const EncoderParams& encoder, const Dataset& data, HeadArch arch,
                                  const TrainConfig& config) {
  config.validate();
  data.validate();
  const Split3 tr = gather(data, encoder, Split::train);
  const Split3 val = gather(data, encoder, Split::val);
  if (tr.rows.empty()) throw InputError("downstream training needs train rows");
  const Matrix Ztr = encode(encoder, tr.X, tr.s);
  const Matrix Zval = encode(encoder, val.X, val.s);

  DownstreamResult r;
  r.head = make_head(arch, encoder.dim(), config.hidden,
                     derive_seed(derive_seed(config.seed, kDownstream), static_cast<std::uint64_t>(arch)));
  const auto trained = blocks(r.head);
  const OptimizerConfig opt = config.descent_optimizer();
  Rng shuffle_rng(derive_seed(config.seed, kShuffle));
  std::vector<std::size_t> order(tr.rows.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochRecord rec{.epoch = epoch};
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::span<const std::size_t> rows(order.data() + start,
                                              std::min(order.size(), start + config.batch_size) - start);
      Tape tape;
      auto loss = tape.bce_with_logits(head_logits(tape, r.head, tape.constant(Ztr.select_rows(rows))),
                                       pick(tr.y, rows));
      for (ParamBlock* p : trained) p->zero_grad();
      tape.backward(loss);
      for (ParamBlock* p : trained) optimizer_step(*p, opt);
      rec.train_loss += tape.scalar(loss);
      ++n_batches;
    }
    rec.train_loss /= static_cast<double>(n_batches);
    if (val.rows.empty()) {
      rec.val_loss = rec.val_acc = rec.val_dp = kNaN;
    } else {
      const Matrix logits = head_logits(r.head, Zval);
      const ScoredBatch sb{logits.values(), val.s, val.y};
      rec.val_loss = bce_with_logits(logits.values(), val.y);
      rec.val_acc = accuracy(sb);
      rec.val_dp = delta_dp(sb);
    }
    r.history.epochs.push_back(rec);
    r.history.snapshots.push_back(snapshot_of(trained));
  }
  const CheckpointChoice choice = select_checkpoint(r.history, Selection::min_val_loss);
  r.chosen_epoch = choice.epoch;
  restore(*choice.snapshot, trained);
  if (!config.keep_snapshots) r.history.snapshots.clear();
  return r;
}

CheckpointChoice select_checkpoint(const TrainHistory& history, Selection criterion) {
  if (history.epochs.empty()) throw InputError("cannot select a checkpoint from an empty history");
  if (criterion == Selection::last_epoch) {
    const std::size_t k = history.epochs.size() - 1;
    return {history.epochs[k].epoch, k < history.snapshots.size() ? &history.snapshots[k] : nullptr};
  }
  auto score = [&](const EpochRecord& e) {
    const double v = criterion == Selection::acc_minus_dp ? e.val_acc - e.val_dp : -e.val_loss;
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };
  std::size_t best = 0;
  for (std::size_t k = 1; k < history.epochs.size(); ++k) {
    if (score(history.epochs[k]) > score(history.epochs[best])) best = k;
  }
  return {history.epochs[best].epoch, best < history.snapshots.size() ? &history.snapshots[best] : nullptr};
}

Snapshot snapshot_of(std::span<ParamBlock* const> blocks) {
  Snapshot s;
  for (const ParamBlock* b : blocks) s.push_back(b->value);
  return s;
}

void restore(const Snapshot& snapshot, std::span<ParamBlock* const> blocks) {
  if (snapshot.size() != blocks.size()) {
    throw ShapeError("snapshot has " + std::to_string(snapshot.size()) + " blocks, model has " +
                     std::to_string(blocks.size()));
  }
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    require_same_shape(blocks[k]->value, snapshot[k], "restore");
    blocks[k]->value = snapshot[k];
  }
}

ScoredBatch score_split(const EncoderParams& encoder, const HeadParams& head, const Dataset& data, Split which) {
  const auto rows = data.indices(which);
  const Matrix X = data.X.select_rows(rows);
  const BinaryVector s = pick(data.s, rows);
  return ScoredBatch{head_logits(head, encode(encoder, X, s)).values(), s, pick(data.y, rows)};
}

std::vector<double> normalize_lambdas(std::span<const double> lambdas) {
  std::vector<double> out(lambdas.begin(), lambdas.end());
  for (double l : out) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw InputError("lambda values must be finite and >= 0");
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw InputError("lambda grid is empty");
  return out;
}

namespace {

HeadReport report_for(const EncoderParams& enc, const HeadParams& head, const Dataset& data) {
  HeadReport h{.arch = head.arch};
  if (data.count(Split::val)) h.val = evaluate(score_split(enc, head, data, Split::val));
  if (data.count(Split::test)) h.test = evaluate(score_split(enc, head, data, Split::test));
  return h;
}

SweepPoint sweep_run(const Dataset& data, TrainConfig cfg, const SweepOptions& opts) {
  SweepPoint p{.lambda = cfg.lambda, .seed = cfg.seed};
  if (cfg.mode == TrainMode::sup) {
    SupervisedResult r = train_supervised(data, cfg);
    const auto choice = select_checkpoint(r.history, opts.selection.value_or(Selection::acc_minus_dp));
    std::vector<ParamBlock*> bs = blocks(r.encoder);
    for (ParamBlock* b : blocks(r.head)) bs.push_back(b);
    if (choice.snapshot) restore(*choice.snapshot, bs);
    p.chosen_epoch = choice.epoch;
    p.heads.push_back(report_for(r.encoder, r.head, data));
    r.history.snapshots.clear();
    p.history = std::move(r.history);
    return p;
  }
  UnsupervisedResult r = train_unsupervised(data, cfg);
  const auto choice = select_checkpoint(r.history, opts.selection.value_or(Selection::min_val_loss));
  std::vector<ParamBlock*> bs = blocks(r.encoder);
  for (ParamBlock* b : blocks(r.decoder)) bs.push_back(b);
  if (choice.snapshot) restore(*choice.snapshot, bs);
  p.chosen_epoch = choice.epoch;
  TrainConfig down = cfg;
  down.mode = TrainMode::sup;
  down.epochs = opts.downstream_epochs;
  down.keep_snapshots = false;
  const std::vector<HeadArch> heads = opts.heads.empty() ? std::vector<HeadArch>{cfg.head} : opts.heads;
  for (HeadArch a : heads) {
    const DownstreamResult d = train_downstream(r.encoder, data, a, down);
    p.heads.push_back(report_for(r.encoder, d.head, data));
  }
  r.history.snapshots.clear();
  p.history = std::move(r.history);
  return p;
}

}  // namespace

std::vector<SweepPoint> sweep(const Dataset& data, const TrainConfig& config, std::span<const double> lambdas,
                              const SweepOptions& options) {
  const std::vector<double> grid = normalize_lambdas(lambdas);
  config.validate();
  std::vector<SweepPoint> out(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    TrainConfig cfg = config;
    cfg.lambda = grid[idx];
    cfg.seed = config.seed + static_cast<std::uint64_t>(k);
    try {
      out[idx] = sweep_run(data, cfg, options);
    } catch (const std::exception& e) {
      out[idx] = SweepPoint{.lambda = cfg.lambda, .seed = cfg.seed, .error = e.what()};
    }
  }
  return out;
}

}  // namespace fairrep
