#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kgc/embed/table.hpp"
#include "kgc/kernels.hpp"
#include "kgc/kg/graph.hpp"

namespace kgc {

using kernels::SimPair;

/// Row-normalised copy of a table in 64-bit, with zero-norm rows flagged.
struct UnitRows {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;
  std::size_t zero_norm_rows = 0;
};

UnitRows normalize_rows(const NodeEmbeddingTable& table);

struct SimEdgeSet {
  std::vector<SimPair> pairs;  // first < second, ordered
  double tau = 1.0;
  std::string criterion;       // "tau", "cap" or "tail"
  std::size_t zero_norm_rows = 0;
};

/// Every pair i < j with cosine >= tau, scanned in block x block tiles.
/// The result does not depend on the block size.
SimEdgeSet pairwise_topk_by_threshold(const NodeEmbeddingTable& table, double tau,
                                      std::size_t block = 256);

struct CapChoice {
  double tau = 1.0;
  std::uint64_t pairs = 0;      // pairs selected at tau
  bool cap_exceeded = false;    // even tau = 1.00 selects more than the cap
  kernels::GridCounts counts{}; // pairs with cosine >= k/100
};

/// Smallest tau on the 0.01 grid in [0, 1] whose pair count stays within
/// max_new_edges.
CapChoice select_threshold_cap(const NodeEmbeddingTable& table, std::uint64_t max_new_edges,
                               std::size_t block = 256);
/// Same selection from precomputed grid counts.
CapChoice choose_cap_threshold(const kernels::GridCounts& counts, std::uint64_t max_new_edges);

struct TailChoice {
  double tau = 1.0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t samples = 0;
};

inline constexpr double kDefaultTailK = 3.0;
inline constexpr std::size_t kDefaultTailSamples = 10'000'000;

/// tau = mean + k * stddev of the given similarities. Rejects a degenerate
/// (zero-variance) sample.
TailChoice tail_threshold(std::span<const double> similarities, double k);

/// Estimates the pairwise similarity distribution from sample_pairs uniform
/// random pairs (every pair when there are fewer) and applies tail_threshold.
TailChoice select_threshold_tail(const NodeEmbeddingTable& table, std::size_t sample_pairs,
                                 std::uint64_t seed, double k = kDefaultTailK);

/// Attaches the pairs as `sim` edges (both directions in the encoder view).
/// Decoder-facing edges are unchanged.
KnowledgeGraph densify(const KnowledgeGraph& graph, const SimEdgeSet& sim_edges);

/// TSV rows "phrase1<TAB>phrase2<TAB>similarity", one per pair.
void write_sim_pairs(const std::filesystem::path& path, const KnowledgeGraph& graph,
                     const SimEdgeSet& sim_edges);
/// Reads pairs written by write_sim_pairs against the graph's vocabulary.
/// Unknown phrases and malformed rows are FormatErrors naming the line.
SimEdgeSet read_sim_pairs(const std::filesystem::path& path, const KnowledgeGraph& graph);

}  // namespace kgc
