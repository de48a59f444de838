#include "kgc/train/model.hpp"

#include <algorithm>
#include <numeric>

#include "kgc/error.hpp"
#include "kgc/numerics/ops.hpp"

namespace kgc {

namespace {

constexpr std::uint64_t kInitStream = 1;

Tensor text_tensor(const NodeEmbeddingTable& table, std::size_t nodes) {
  if (table.rows != nodes)
    throw ConfigError("text features have " + std::to_string(table.rows) + " rows for " +
                      std::to_string(nodes) + " nodes");
  return Tensor::from_values({table.rows, table.dim},
                             std::vector<double>(table.values.begin(), table.values.end()));
}

}  // namespace

KgcModel::KgcModel(const TrainConfig& config, const KnowledgeGraph& graph,
                   std::optional<NodeEmbeddingTable> text)
    : variant_(parse_variant(config.variant)) {
  config.validate();
  if (variant_.text && !text)
    throw ConfigError("variant " + variant_.name + " needs a text embedding file");
  if (variant_.sim && graph.sim_pairs().empty())
    throw ConfigError("variant " + variant_.name + " needs sim pairs on the graph");
  if (variant_.text) text_ = text_tensor(*text, graph.num_nodes());

  Rng rng = make_rng(config.seed, kInitStream);
  const std::size_t n = graph.num_nodes();
  std::size_t dim = 0;
  if (variant_.learned_table()) {
    params_.add("entity/emb",
                Tensor::parameter({n, config.dim}, embedding_uniform(n, config.dim, rng), true),
                false);
    dim = config.dim;
  }
  if (variant_.gcn) {
    encoder_ = std::make_unique<GcnEncoder>(GcnOptions{config.gcn_layers, config.dim}, n,
                                            graph.num_relations(), params_, rng);
    dim += config.dim;
  }
  if (variant_.text) dim += text_.dim(1);

  const std::size_t rels = graph.num_directed_relations();
  switch (variant_.decoder) {
    case DecoderKind::ConvTransE: {
      ConvTransEOptions o{config.channels, config.kernel, config.dropout, config.dropout,
                          config.dropout, config.decoder_activation == "relu"};
      decoder_ = std::make_unique<ConvTransE>(o, dim, rels, params_, rng);
      break;
    }
    case DecoderKind::DistMult:
      decoder_ = std::make_unique<DistMult>(dim, rels, params_, rng);
      break;
    case DecoderKind::ComplEx:
      decoder_ = std::make_unique<ComplEx>(dim, rels, params_, rng);
      break;
  }
}

NodeReprs KgcModel::represent(const GraphView& view, const std::vector<double>* text_mask) const {
  NodeReprs r;
  const std::vector<std::size_t> ids(view.nodes.begin(), view.nodes.end());
  if (variant_.learned_table()) r.graph = gather_rows(params_.get("entity/emb"), ids);
  if (encoder_) r.graph = encoder_->encode(view);
  if (text_.defined()) {
    r.text = view.full ? text_ : gather_rows(text_, ids);
    if (text_mask) r.text = scale_cols(r.text, *text_mask);
  }
  if (r.graph.defined() && r.text.defined()) r.full = concat_cols({r.graph, r.text});
  else r.full = r.graph.defined() ? r.graph : r.text;
  return r;
}

Tensor KgcModel::heads(const NodeReprs& reprs, std::span<const std::size_t> nodes,
                       std::span<const std::size_t> graph_order) const {
  if (graph_order.empty()) return gather_rows(reprs.full, nodes);
  if (!reprs.graph.defined())
    throw ConfigError("variant " + variant_.name + " has no graph embeddings to reorder");
  if (graph_order.size() != nodes.size())
    throw ShapeError("heads: graph order has " + std::to_string(graph_order.size()) +
                     " entries for " + std::to_string(nodes.size()) + " nodes");
  const Tensor g = gather_rows(reprs.graph, graph_order);
  if (!reprs.text.defined()) return g;
  return concat_cols({g, gather_rows(reprs.text, nodes)});
}

ModelScorer::ModelScorer(const KgcModel& model, const KnowledgeGraph& graph, Shuffle shuffle)
    : model_(&model), view_(full_view(graph, model.variant().sim)), shuffle_(std::move(shuffle)) {
  NoGradGuard guard;
  reprs_ = model.represent(view_);
}

void ModelScorer::score(std::span<const Query> queries, std::span<double> out) const {
  NoGradGuard guard;
  std::vector<std::size_t> src(queries.size()), rel(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    src[q] = queries[q].src;
    rel[q] = queries[q].rel;
  }
  std::vector<std::size_t> order;
  if (shuffle_) {
    order = src;
    shuffle_(order);
  }
  Rng unused(0);
  const Tensor logits =
      model_->decoder().logits(model_->heads(reprs_, src, order), rel, reprs_.full, false, unused);
  const auto v = logits.values();
  if (out.size() != v.size()) throw ShapeError("score: output buffer has the wrong size");
  std::copy(v.begin(), v.end(), out.begin());
}

}  // namespace kgc
