#include "fairrep/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "fairrep/error.hpp"

namespace fairrep {

using nlohmann::ordered_json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

ordered_json optimizer_json(const OptimizerConfig& o) {
  ordered_json j;
  j["kind"] = std::string(to_string(o.kind));
  j["learning_rate"] = o.learning_rate;
  j["rho"] = o.rho;
  j["eps"] = o.eps;
  j["beta1"] = o.beta1;
  j["beta2"] = o.beta2;
  return j;
}

OptimizerConfig optimizer_from(const ordered_json& j) {
  OptimizerConfig o;
  o.kind = parse_optimizer_kind(j.at("kind").get<std::string>());
  o.learning_rate = j.at("learning_rate").get<double>();
  o.rho = j.at("rho").get<double>();
  o.eps = j.at("eps").get<double>();
  o.beta1 = j.at("beta1").get<double>();
  o.beta2 = j.at("beta2").get<double>();
  return o;
}

ordered_json config_json(const TrainConfig& c) {
  ordered_json j;
  j["mode"] = std::string(to_string(c.mode));
  j["lambda"] = c.lambda;
  j["epochs"] = c.epochs;
  j["t_adv"] = c.t_adv;
  j["batch_size"] = c.batch_size;
  j["lr"] = c.lr;
  j["lr_adv"] = c.lr_adv;
  j["optimizer"] = optimizer_json(c.optimizer);
  j["adversary_uses_optimizer"] = c.adversary_uses_optimizer;
  j["adversary_optimizer"] = optimizer_json(c.adversary_optimizer);
  j["adversary_reset"] = std::string(to_string(c.adversary_reset));
  j["target"] = std::string(to_string(c.target));
  j["include_s"] = c.include_s;
  j["seed"] = c.seed;
  j["m"] = c.m;
  j["head"] = std::string(to_string(c.head));
  j["hidden"] = c.hidden;
  return j;
}

TrainConfig config_from(const ordered_json& j) {
  TrainConfig c;
  c.mode = parse_train_mode(j.at("mode").get<std::string>());
  c.lambda = j.at("lambda").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.t_adv = j.at("t_adv").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.lr = j.at("lr").get<double>();
  c.lr_adv = j.at("lr_adv").get<double>();
  c.optimizer = optimizer_from(j.at("optimizer"));
  c.adversary_uses_optimizer = j.at("adversary_uses_optimizer").get<bool>();
  c.adversary_optimizer = optimizer_from(j.at("adversary_optimizer"));
  c.adversary_reset = parse_adversary_reset(j.at("adversary_reset").get<std::string>());
  c.target = parse_fairness_target(j.at("target").get<std::string>());
  c.include_s = j.at("include_s").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.m = j.at("m").get<std::size_t>();
  c.head = parse_head_arch(j.at("head").get<std::string>());
  c.hidden = j.at("hidden").get<std::size_t>();
  return c;
}

void put_block(ordered_json& arr, const std::string& name, const ParamBlock& b) {
  ordered_json j;
  j["name"] = name;
  j["rows"] = b.value.rows();
  j["cols"] = b.value.cols();
  j["data"] = b.value.values();
  arr.push_back(std::move(j));
}

ParamBlock get_block(const ordered_json& arr, const std::string& name) {
  for (const auto& j : arr) {
    if (j.at("name").get<std::string>() != name) continue;
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols) {
      throw InputError("checkpoint block '" + name + "' has " + std::to_string(data.size()) + " values for shape " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    }
    return ParamBlock(Matrix(rows, cols, std::move(data)));
  }
  throw InputError("checkpoint has no block named '" + name + "'");
}

void put_layers(ordered_json& arr, const std::string& prefix, const std::vector<Layer>& layers) {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    put_block(arr, prefix + std::to_string(k) + ".W", layers[k].W);
    put_block(arr, prefix + std::to_string(k) + ".b", layers[k].b);
  }
}

Layer get_layer(const ordered_json& arr, const std::string& prefix) {
  return Layer{get_block(arr, prefix + ".W"), get_block(arr, prefix + ".b")};
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string train_config_json(const TrainConfig& config) { return config_json(config).dump(2) + "\n"; }

TrainConfig train_config_from_json(const std::string& text) {
  try {
    return config_from(ordered_json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad training config JSON: ") + e.what());
  }
}

std::string history_csv(const TrainHistory& history) {
  std::ostringstream os;
  os << "epoch,train_loss,fair_loss,val_loss,val_acc,val_dp,empty_groups\n";
  for (const auto& e : history.epochs) {
    os << e.epoch << ',' << num(e.train_loss) << ',' << num(e.fair_loss) << ',' << num(e.val_loss) << ','
       << num(e.val_acc) << ',' << num(e.val_dp) << ',' << e.empty_groups << '\n';
  }
  return os.str();
}

std::string checkpoint_json(const Checkpoint& ckpt) {
  ordered_json j;
  j["format"] = "fairrep-checkpoint";
  j["version"] = 1;
  j["config"] = config_json(ckpt.config);
  j["chosen_epoch"] = ckpt.chosen_epoch;
  j["encoder_slope"] = ckpt.encoder.slope;
  j["encoder_include_s"] = ckpt.encoder.include_s;
  ordered_json blocks = ordered_json::array();
  put_block(blocks, "encoder.W", ckpt.encoder.layer.W);
  put_block(blocks, "encoder.b", ckpt.encoder.layer.b);
  if (ckpt.head) {
    j["head_arch"] = std::string(to_string(ckpt.head->arch));
    j["head_layers"] = ckpt.head->layers.size();
    j["head_slope"] = ckpt.head->slope;
    put_layers(blocks, "head.", ckpt.head->layers);
  }
  if (ckpt.decoder) {
    put_block(blocks, "decoder.W", ckpt.decoder->layer.W);
    put_block(blocks, "decoder.b", ckpt.decoder->layer.b);
  }
  j["blocks"] = std::move(blocks);
  return j.dump() + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  try {
    const auto j = ordered_json::parse(text);
    if (j.value("format", std::string()) != "fairrep-checkpoint") throw InputError("not a fairrep checkpoint");
    if (j.at("version").get<int>() != 1) throw InputError("unsupported checkpoint version");
    Checkpoint c;
    c.config = config_from(j.at("config"));
    c.chosen_epoch = j.at("chosen_epoch").get<std::size_t>();
    const auto& blocks = j.at("blocks");
    c.encoder.layer = get_layer(blocks, "encoder");
    c.encoder.slope = j.at("encoder_slope").get<double>();
    c.encoder.include_s = j.at("encoder_include_s").get<bool>();
    if (j.contains("head_arch")) {
      HeadParams h;
      h.arch = parse_head_arch(j.at("head_arch").get<std::string>());
      h.slope = j.at("head_slope").get<double>();
      const auto n = j.at("head_layers").get<std::size_t>();
      for (std::size_t k = 0; k < n; ++k) h.layers.push_back(get_layer(blocks, "head." + std::to_string(k)));
      c.head = std::move(h);
    }
    bool has_decoder = false;
    for (const auto& b : blocks) has_decoder = has_decoder || b.at("name").get<std::string>() == "decoder.W";
    if (has_decoder) c.decoder = DecoderParams{get_layer(blocks, "decoder")};
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad checkpoint JSON: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_text_file(path, checkpoint_json(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return checkpoint_from_json(read_text_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

}  // namespace fairrep
