#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fairrep/data.hpp"
#include "fairrep/ipm.hpp"
#include "fairrep/metrics.hpp"
#include "fairrep/models.hpp"
#include "fairrep/optimizer.hpp"

namespace fairrep {

enum class TrainMode { sup, unsup };

// persistent: one discriminator carried across minibatches.
// per_batch: redrawn from a seeded stream at the start of every minibatch,
// then ascended t_adv times.
enum class AdversaryReset { persistent, per_batch };
std::string_view to_string(AdversaryReset r);
AdversaryReset parse_adversary_reset(std::string_view name);
std::string_view to_string(TrainMode m);
TrainMode parse_train_mode(std::string_view name);

inline constexpr std::size_t kSupervisedEpochs = 400;
inline constexpr std::size_t kUnsupervisedEpochs = 300;
inline constexpr std::size_t kDownstreamEpochs = 100;

struct TrainConfig {
  TrainMode mode = TrainMode::sup;
  double lambda = 0.0;
  std::size_t epochs = kSupervisedEpochs;
  std::size_t t_adv = 2;
  std::size_t batch_size = 512;
  // Descent rate for (encoder, head/decoder); copied into `optimizer` by train_*.
  double lr = 2.0;
  // Ascent rate for the discriminators.
  double lr_adv = 0.5;
  // true: discriminators are stepped by `adversary_optimizer` at lr_adv;
  // false: plain gradient ascent psi += lr_adv * grad.
  bool adversary_uses_optimizer = true;
  OptimizerConfig adversary_optimizer = adam_config(0.5);
  AdversaryReset adversary_reset = AdversaryReset::per_batch;
  OptimizerConfig optimizer{};
  FairnessTarget target = FairnessTarget::dp;
  bool include_s = true;
  std::uint64_t seed = 0;
  std::size_t m = 60;
  HeadArch head = HeadArch::leakyrelu1;
  std::size_t hidden = 0;  // 0 -> m

  // Instrumentation for tests.
  bool disable_fair_term = false;
  bool record_steps = false;
  bool keep_snapshots = true;

  void validate() const;
  OptimizerConfig descent_optimizer() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean task loss over minibatches
  double fair_loss = 0.0;   // mean post-ascent gap over minibatches
  double val_loss = 0.0;    // task loss + lambda * gap on the validation split
  double val_acc = 0.0;     // NaN without a prediction head
  double val_dp = 0.0;      // NaN without a prediction head
  std::size_t empty_groups = 0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct StepEvent {
  enum class Kind : std::uint8_t { ascent, descent };
  std::size_t epoch = 0;
  std::size_t batch = 0;
  Kind kind = Kind::descent;
  std::size_t stratum = 0;
  double value = 0.0;  // gap after the ascent step, or total loss at the descent step

  friend bool operator==(const StepEvent&, const StepEvent&) = default;
};

// Parameter values of every trained block at the end of an epoch.
using Snapshot = std::vector<Matrix>;

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::vector<Snapshot> snapshots;
  std::vector<StepEvent> steps;
  std::size_t empty_group_batches = 0;

  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct SupervisedResult {
  EncoderParams encoder;
  HeadParams head;
  std::vector<Discriminator> discriminators;
  TrainHistory history;
};

struct UnsupervisedResult {
  EncoderParams encoder;
  DecoderParams decoder;
  std::vector<Discriminator> discriminators;
  TrainHistory history;
};

struct DownstreamResult {
  HeadParams head;  // parameters of the selected epoch
  std::size_t chosen_epoch = 0;
  TrainHistory history;
};

SupervisedResult train_supervised(const Dataset& data, const TrainConfig& config);
UnsupervisedResult train_unsupervised(const Dataset& data, const TrainConfig& config);
// Encoder outputs are computed once; only the head is updated. Selection by
// minimum validation loss.
DownstreamResult train_downstream(const EncoderParams& encoder, const Dataset& data, HeadArch arch,
                                  const TrainConfig& config);

enum class Selection { acc_minus_dp, min_val_loss, last_epoch };
Selection parse_selection(std::string_view name);
std::string_view to_string(Selection s);

struct CheckpointChoice {
  std::size_t epoch = 0;
  const Snapshot* snapshot = nullptr;  // null when snapshots were not kept
};

// argmax(val_acc - val_dp) or argmin(val_loss); the earliest epoch wins ties.
// last_epoch takes the final parameters.
CheckpointChoice select_checkpoint(const TrainHistory& history, Selection criterion);
void restore(const Snapshot& snapshot, std::span<ParamBlock* const> blocks);
Snapshot snapshot_of(std::span<ParamBlock* const> blocks);

// Scores on one split.
ScoredBatch score_split(const EncoderParams& encoder, const HeadParams& head, const Dataset& data, Split which);

struct HeadReport {
  HeadArch arch = HeadArch::leakyrelu1;
  FairnessReport val;
  FairnessReport test;
};

struct SweepPoint {
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::size_t chosen_epoch = 0;
  std::vector<HeadReport> heads;
  TrainHistory history;
  std::string error;  // nonempty when the run failed; other runs are unaffected
};

struct SweepOptions {
  // Unsupervised only: one downstream head per entry (empty -> config.head).
  std::vector<HeadArch> heads;
  std::size_t downstream_epochs = kDownstreamEpochs;
  // Defaults: acc_minus_dp for sup, min_val_loss for unsup.
  std::optional<Selection> selection;
};

// Sorted, deduplicated lambda grid.
std::vector<double> normalize_lambdas(std::span<const double> lambdas);
// One run per lambda of the normalized grid, run k seeded with config.seed + k,
// executed in parallel. Each point reports the selected checkpoint; a failing
// run is recorded in its point's `error`.
std::vector<SweepPoint> sweep(const Dataset& data, const TrainConfig& config, std::span<const double> lambdas,
                              const SweepOptions& options = {});

}  // namespace fairrep
