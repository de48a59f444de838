#pragma once

#include <cstdint>
#include <filesystem>

#include "kgc/embed/table.hpp"
#include "kgc/kg/graph.hpp"
#include "kgc/train/config.hpp"

namespace kgc::testing {

/// `edges` distinct random tuples (no self loops) over nodes "n0".. and
/// relations "r0"..; every node is interned even when isolated.
KnowledgeGraph random_kg(std::size_t nodes, std::size_t relations, std::size_t edges,
                         std::uint64_t seed);

/// Nodes fall into `clusters` equal groups; relation r links group c to group
/// (c + r + 1) mod clusters. Tuples are drawn from that pattern and split
/// into train and test.
KnowledgeGraph cluster_kg(std::size_t nodes, std::size_t clusters, std::size_t relations,
                          std::size_t train_edges, std::size_t test_edges, std::uint64_t seed);

/// Gaussian rows, one per node.
NodeEmbeddingTable gaussian_table(std::size_t rows, std::size_t dim, std::uint64_t seed);

/// Small ConvTransE settings that memorize a toy graph quickly.
TrainConfig toy_config(std::string variant, std::uint64_t seed = 7);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace kgc::testing
