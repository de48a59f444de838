#include "kgc/train/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "kgc/error.hpp"
#include "kgc/kg/graph.hpp"

namespace kgc {

namespace {

const std::set<std::string, std::less<>> kTrainKeys = {
    "version",     "variant",        "epochs",       "lr",           "l2",
    "label_smoothing", "grad_clip",  "dropout",      "batch_size",   "eval_batch_size",
    "subgraph_budget", "eval_every", "select_split", "mask_horizon", "mask_mode",
    "dim",         "gcn_layers",     "channels",     "kernel",       "decoder_activation", "seed"};

const std::set<std::string, std::less<>> kRunKeys = {"version", "train", "data", "embeddings",
                                                     "phrases", "sim_pairs", "out_dir"};

void reject_unknown(const nlohmann::json& j, const std::set<std::string, std::less<>>& keys,
                    std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!keys.contains(key))
      throw ConfigError("unknown " + std::string(where) + " field '" + key + "'");
}

void check_version(const nlohmann::json& j) {
  if (!j.contains("version")) return;
  const int v = j.at("version").get<int>();
  if (v < 1 || v > TrainConfig::kVersion)
    throw ConfigError("unsupported config version " + std::to_string(v));
}

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

Variant parse_variant(std::string_view name) {
  Variant v;
  v.name = std::string(name);
  if (name == "distmult") {
    v.decoder = DecoderKind::DistMult;
    return v;
  }
  if (name == "complex") {
    v.decoder = DecoderKind::ComplEx;
    return v;
  }
  if (name == "convtranse") return v;
  if (name == "gcn+convtranse") {
    v.gcn = true;
  } else if (name == "sim+gcn+convtranse") {
    v.gcn = v.sim = true;
  } else if (name == "bert+convtranse") {
    v.text = true;
  } else if (name == "gcn+bert+convtranse") {
    v.gcn = v.text = true;
  } else if (name == "sim+gcn+bert+convtranse") {
    v.gcn = v.sim = v.text = true;
  } else {
    throw ConfigError("unknown model variant '" + std::string(name) + "'");
  }
  return v;
}

void TrainConfig::validate() const {
  parse_variant(variant);
  require(epochs >= 1, "epochs must be at least 1");
  require(std::isfinite(lr) && lr > 0.0, "lr must be positive");
  require(std::isfinite(l2) && l2 >= 0.0, "l2 must be non-negative");
  require(label_smoothing >= 0.0 && label_smoothing < 1.0, "label_smoothing must be in [0, 1)");
  require(std::isfinite(grad_clip) && grad_clip > 0.0, "grad_clip must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(eval_batch_size >= 1, "eval_batch_size must be at least 1");
  require(subgraph_budget >= 1, "subgraph_budget must be at least 1");
  require(eval_every >= 1, "eval_every must be at least 1");
  parse_split(select_split);
  require(mask_horizon >= 1, "mask_horizon must be at least 1");
  require(dim >= 1, "dim must be at least 1");
  require(gcn_layers >= 1, "gcn_layers must be at least 1");
  require(channels >= 1, "channels must be at least 1");
  require(kernel % 2 == 1, "kernel must be odd");
  require(decoder_activation == "relu" || decoder_activation == "none",
          "decoder_activation must be relu or none");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"version", TrainConfig::kVersion},
                     {"variant", c.variant},
                     {"epochs", c.epochs},
                     {"lr", c.lr},
                     {"l2", c.l2},
                     {"label_smoothing", c.label_smoothing},
                     {"grad_clip", c.grad_clip},
                     {"dropout", c.dropout},
                     {"batch_size", c.batch_size},
                     {"eval_batch_size", c.eval_batch_size},
                     {"subgraph_budget", c.subgraph_budget},
                     {"eval_every", c.eval_every},
                     {"select_split", c.select_split},
                     {"mask_horizon", c.mask_horizon},
                     {"mask_mode", c.mask_mode == MaskMode::Reveal ? "reveal" : "hide"},
                     {"dim", c.dim},
                     {"gcn_layers", c.gcn_layers},
                     {"channels", c.channels},
                     {"kernel", c.kernel},
                     {"decoder_activation", c.decoder_activation},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  reject_unknown(j, kTrainKeys, "train config");
  check_version(j);
  read_field(j, "variant", c.variant);
  read_field(j, "epochs", c.epochs);
  read_field(j, "lr", c.lr);
  read_field(j, "l2", c.l2);
  read_field(j, "label_smoothing", c.label_smoothing);
  read_field(j, "grad_clip", c.grad_clip);
  read_field(j, "dropout", c.dropout);
  read_field(j, "batch_size", c.batch_size);
  read_field(j, "eval_batch_size", c.eval_batch_size);
  read_field(j, "subgraph_budget", c.subgraph_budget);
  read_field(j, "eval_every", c.eval_every);
  read_field(j, "select_split", c.select_split);
  read_field(j, "mask_horizon", c.mask_horizon);
  std::string mode;
  read_field(j, "mask_mode", mode);
  if (mode == "reveal") c.mask_mode = MaskMode::Reveal;
  else if (mode == "hide") c.mask_mode = MaskMode::Hide;
  else if (!mode.empty()) throw ConfigError("mask_mode must be reveal or hide, got '" + mode + "'");
  read_field(j, "dim", c.dim);
  read_field(j, "gcn_layers", c.gcn_layers);
  read_field(j, "channels", c.channels);
  read_field(j, "kernel", c.kernel);
  read_field(j, "decoder_activation", c.decoder_activation);
  read_field(j, "seed", c.seed);
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{{"version", TrainConfig::kVersion},
                     {"train", c.train},
                     {"data", c.data.string()},
                     {"embeddings", c.embeddings.string()},
                     {"phrases", c.phrases.string()},
                     {"sim_pairs", c.sim_pairs.string()},
                     {"out_dir", c.out_dir.string()}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  reject_unknown(j, kRunKeys, "run config");
  check_version(j);
  if (j.contains("train")) from_json(j.at("train"), c.train);
  std::string s;
  auto path_field = [&](const char* key, std::filesystem::path& out) {
    if (!j.contains(key)) return;
    read_field(j, key, s);
    out = s;
  };
  path_field("data", c.data);
  path_field("embeddings", c.embeddings);
  path_field("phrases", c.phrases);
  path_field("sim_pairs", c.sim_pairs);
  path_field("out_dir", c.out_dir);
}

RunConfig read_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  RunConfig c;
  from_json(j, c);
  return c;
}

void write_run_config(const std::filesystem::path& path, const RunConfig& config) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << nlohmann::json(config).dump(2) << '\n';
}

}  // namespace kgc
