#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kgc/embed/table.hpp"
#include "kgc/eval/ranking.hpp"
#include "kgc/train/model.hpp"

namespace kgc {

struct PermutationResult {
  Metrics base;
  Metrics shuffled;
  double delta_mrr = 0.0;  // shuffled - base
};

/// Re-ranks `split` with the graph embeddings of each evaluation batch's
/// queries shuffled uniformly among themselves (text features stay in
/// place). Text-only models are rejected.
PermutationResult permutation_test(const KgcModel& model, const KnowledgeGraph& graph, Split split,
                                   std::uint64_t seed, std::size_t batch_size = 128);

/// Same as permutation_test with a caller-supplied reordering.
PermutationResult permutation_test(const KgcModel& model, const KnowledgeGraph& graph, Split split,
                                   const ModelScorer::Shuffle& shuffle,
                                   std::size_t batch_size = 128);

struct AblationRow {
  double density = 0.0;
  std::size_t train_edges = 0;
  Metrics metrics;
};

/// For each target density (descending, none above the graph's), drops
/// training edges to that density, trains a fresh model with `config` and
/// ranks the test split (dev when test is empty). Lower densities keep a
/// subset of the edges kept at higher ones.
std::vector<AblationRow> density_ablation(
    const KnowledgeGraph& graph, std::span<const double> densities, const TrainConfig& config,
    const std::optional<NodeEmbeddingTable>& text = std::nullopt,
    const std::function<void(const AblationRow&)>& on_row = {});

/// `density,train_edges,mrr,hits1,hits3,hits10`.
void write_ablation_csv(const std::filesystem::path& path, std::span<const AblationRow> rows);

}  // namespace kgc
