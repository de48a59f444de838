#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace kgc {

enum class DecoderKind { ConvTransE, DistMult, ComplEx };

/// Where node representations come from. A variant without graph or text
/// features learns a free embedding table.
struct Variant {
  std::string name;
  bool gcn = false;
  bool sim = false;
  bool text = false;
  DecoderKind decoder = DecoderKind::ConvTransE;

  bool learned_table() const { return !gcn && !text; }
  bool concat() const { return gcn && text; }
};

/// convtranse, gcn+convtranse, sim+gcn+convtranse, bert+convtranse,
/// gcn+bert+convtranse, sim+gcn+bert+convtranse, distmult, complex.
Variant parse_variant(std::string_view name);

enum class MaskMode { Reveal, Hide };

struct TrainConfig {
  static constexpr int kVersion = 1;

  std::string variant = "sim+gcn+bert+convtranse";
  std::size_t epochs = 200;
  double lr = 1e-4;
  double l2 = 0.1;
  double label_smoothing = 0.1;
  double grad_clip = 1.0;
  double dropout = 0.2;
  std::size_t batch_size = 128;
  std::size_t eval_batch_size = 128;
  std::size_t subgraph_budget = 30000;
  std::size_t eval_every = 10;
  std::string select_split = "dev";
  std::size_t mask_horizon = 100;
  MaskMode mask_mode = MaskMode::Reveal;
  std::size_t dim = 200;
  std::size_t gcn_layers = 2;
  std::size_t channels = 500;
  std::size_t kernel = 5;
  std::string decoder_activation = "relu";
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Dataset and file plumbing around a TrainConfig.
struct RunConfig {
  TrainConfig train;
  std::filesystem::path data;
  std::filesystem::path embeddings;
  std::filesystem::path phrases;
  std::filesystem::path sim_pairs;
  std::filesystem::path out_dir = "out";
};

void to_json(nlohmann::json& j, const TrainConfig& c);
/// Missing fields keep their defaults; unknown fields and a newer version
/// are rejected.
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig read_run_config(const std::filesystem::path& path);
void write_run_config(const std::filesystem::path& path, const RunConfig& config);

}  // namespace kgc
