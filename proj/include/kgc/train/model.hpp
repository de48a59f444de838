#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "kgc/decoder/decoder.hpp"
#include "kgc/embed/table.hpp"
#include "kgc/encoder/gcn.hpp"
#include "kgc/eval/ranking.hpp"
#include "kgc/kg/graph.hpp"
#include "kgc/train/config.hpp"

namespace kgc {

/// Node representations of one view. `graph` holds GCN output or the learned
/// table (undefined for text-only models), `text` the constant text features
/// (possibly masked), `full` what the decoder consumes.
struct NodeReprs {
  Tensor graph;
  Tensor text;
  Tensor full;
};

/// Parameters and forward pass of one model variant.
///
/// Learned tables live under "entity/emb", the encoder under "gcn/" and the
/// decoder under "decoder/".
class KgcModel {
 public:
  /// `text` is required (rows in graph order) exactly when the variant uses
  /// text features; sim variants need sim pairs on the graph.
  KgcModel(const TrainConfig& config, const KnowledgeGraph& graph,
           std::optional<NodeEmbeddingTable> text = std::nullopt);

  KgcModel(const KgcModel&) = delete;
  KgcModel& operator=(const KgcModel&) = delete;

  const Variant& variant() const { return variant_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  const Decoder& decoder() const { return *decoder_; }
  std::size_t repr_dim() const { return decoder_->dim(); }
  std::size_t text_dim() const { return text_.defined() ? text_.dim(1) : 0; }
  bool has_graph_embeddings() const { return !variant_.text || variant_.gcn; }

  /// `text_mask`, when given, multiplies the text columns.
  NodeReprs represent(const GraphView& view, const std::vector<double>* text_mask = nullptr) const;

  /// Rows `nodes` (local ids) of the representation. With `graph_order`, the
  /// graph part of row k is taken from node graph_order[k] instead, while the
  /// text part stays put.
  Tensor heads(const NodeReprs& reprs, std::span<const std::size_t> nodes,
               std::span<const std::size_t> graph_order = {}) const;

 private:
  Variant variant_;
  ParameterSet params_;
  Tensor text_;
  std::unique_ptr<GcnEncoder> encoder_;
  std::unique_ptr<Decoder> decoder_;
};

/// Scores against every graph node on the full view. Representations are
/// computed once, without gradients, at construction.
class ModelScorer final : public LinkScorer {
 public:
  /// Optional hook reordering, per scored batch, which query's graph
  /// embedding each query receives (see KgcModel::heads).
  using Shuffle = std::function<void(std::vector<std::size_t>&)>;

  ModelScorer(const KgcModel& model, const KnowledgeGraph& graph, Shuffle shuffle = {});

  std::size_t num_candidates() const override { return reprs_.full.dim(0); }
  void score(std::span<const Query> queries, std::span<double> out) const override;

 private:
  const KgcModel* model_;
  GraphView view_;
  NodeReprs reprs_;
  Shuffle shuffle_;
};

}  // namespace kgc
