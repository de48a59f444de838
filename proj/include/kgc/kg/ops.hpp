#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "kgc/kg/graph.hpp"

namespace kgc {

struct GraphStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t relations = 0;
  double density = 0.0;
  double average_in_degree = 0.0;
};

/// D = V / (N (N - 1)).
double graph_density(std::size_t nodes, std::size_t edges);

/// Stats over the base training edges. Node count is the vocabulary size, so
/// for Table-style "training set only" numbers load the training file alone.
/// Average in-degree is reported as V / N.
GraphStats compute_stats(const KnowledgeGraph& graph);

using SplitRatios = std::array<double, 3>;

/// Random train/dev/test assignment of the graph's training tuples. Any
/// dev/test tuple touching a node absent from train is moved to train.
std::vector<Split> make_random_split(const KnowledgeGraph& graph, SplitRatios ratios,
                                     std::uint64_t seed);

/// Returns a graph whose training split has all tuples reassigned per `assignment`.
KnowledgeGraph apply_split(const KnowledgeGraph& graph, const std::vector<Split>& assignment);

/// Uniformly subsamples base training edges so the density (same node
/// vocabulary) becomes round(target * N (N - 1)) / (N (N - 1)). Inverses
/// follow their base edge; dev/test and sim pairs are untouched. Kept edges
/// retain their original order.
KnowledgeGraph drop_edges_to_density(const KnowledgeGraph& graph, double target_density,
                                     std::uint64_t seed);

}  // namespace kgc
