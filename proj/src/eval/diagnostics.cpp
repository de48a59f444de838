#include "kgc/eval/diagnostics.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "kgc/error.hpp"
#include "kgc/kg/ops.hpp"
#include "kgc/train/trainer.hpp"

namespace kgc {

namespace {

constexpr std::uint64_t kPermutationStream = 6;

}  // namespace

PermutationResult permutation_test(const KgcModel& model, const KnowledgeGraph& graph, Split split,
                                   const ModelScorer::Shuffle& shuffle, std::size_t batch_size) {
  if (!model.has_graph_embeddings())
    throw ConfigError("variant " + model.variant().name + " has no graph embeddings to shuffle");
  const FilterIndex filter = FilterIndex::build(graph);
  PermutationResult r;
  r.base = evaluate(ModelScorer(model, graph), graph, split, filter, batch_size).average;
  r.shuffled =
      evaluate(ModelScorer(model, graph, shuffle), graph, split, filter, batch_size).average;
  r.delta_mrr = r.shuffled.mrr - r.base.mrr;
  return r;
}

PermutationResult permutation_test(const KgcModel& model, const KnowledgeGraph& graph, Split split,
                                   std::uint64_t seed, std::size_t batch_size) {
  auto rng = std::make_shared<Rng>(make_rng(seed, kPermutationStream));
  return permutation_test(
      model, graph, split,
      [rng](std::vector<std::size_t>& order) { std::shuffle(order.begin(), order.end(), *rng); },
      batch_size);
}

std::vector<AblationRow> density_ablation(const KnowledgeGraph& graph,
                                          std::span<const double> densities,
                                          const TrainConfig& config,
                                          const std::optional<NodeEmbeddingTable>& text,
                                          const std::function<void(const AblationRow&)>& on_row) {
  if (densities.empty()) throw ConfigError("density ablation needs at least one density");
  if (!std::is_sorted(densities.begin(), densities.end(), std::greater<>()))
    throw ConfigError("ablation densities must be sorted in descending order");
  const Split target = graph.edges(Split::Test).empty() ? Split::Dev : Split::Test;
  // Dropped tuples are still true facts, so they stay filtered.
  const FilterIndex filter = FilterIndex::build(graph);
  std::vector<AblationRow> rows;
  for (double d : densities) {
    const KnowledgeGraph thinned = drop_edges_to_density(graph, d, config.seed);
    KgcModel model(config, thinned, text);
    Trainer(model, thinned, config).run();
    const RankingReport report =
        evaluate(ModelScorer(model, thinned), thinned, target, filter,
                 config.eval_batch_size);
    rows.push_back({d, thinned.edges(Split::Train).size(), report.average});
    if (on_row) on_row(rows.back());
  }
  return rows;
}

void write_ablation_csv(const std::filesystem::path& path, std::span<const AblationRow> rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "density,train_edges,mrr,hits1,hits3,hits10\n";
  for (const auto& r : rows) {
    out << fmt::format("{:.6e},{},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.density, r.train_edges,
                       r.metrics.mrr, r.metrics.hits1, r.metrics.hits3, r.metrics.hits10);
  }
}

}  // namespace kgc
