#pragma once

// Node text-embedding file ("KGE1"):
//   "KGE1"  u32 count  u32 dim  count x dim f32 (row-major, little-endian)
// with a sidecar text file holding one phrase per line in row order.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kgc/kg/graph.hpp"

namespace kgc {

inline constexpr char kEmbeddingMagic[4] = {'K', 'G', 'E', '1'};

struct NodeEmbeddingTable {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<float> values;

  std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

/// Default sidecar location: the binary path with its extension replaced by ".txt".
std::filesystem::path default_phrase_sidecar(const std::filesystem::path& binary);

void write_embedding_file(const std::filesystem::path& binary, const NodeEmbeddingTable& table);
NodeEmbeddingTable read_embedding_file(const std::filesystem::path& binary);
void write_phrase_file(const std::filesystem::path& path, std::span<const std::string> phrases);
std::vector<std::string> read_phrase_file(const std::filesystem::path& path);

/// Reads the file pair and permutes rows into graph-id order. Missing or
/// surplus phrases are errors listing the first ten offenders.
NodeEmbeddingTable load_embeddings(const std::filesystem::path& binary,
                                   const std::filesystem::path& phrases,
                                   const KnowledgeGraph& graph);

}  // namespace kgc
