#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "fairrep/train.hpp"

namespace fairrep {

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

std::string train_config_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& text);

// One row per epoch: epoch,train_loss,fair_loss,val_loss,val_acc,val_dp,empty_groups.
std::string history_csv(const TrainHistory& history);

struct Checkpoint {
  TrainConfig config;
  std::size_t chosen_epoch = 0;
  EncoderParams encoder;
  std::optional<HeadParams> head;
  std::optional<DecoderParams> decoder;
};

std::string checkpoint_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fairrep
