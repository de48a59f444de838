#include "kgc/kg/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kgc/error.hpp"
#include "kgc/rng.hpp"

namespace kgc {

double graph_density(std::size_t nodes, std::size_t edges) {
  if (nodes < 2) return 0.0;
  const double n = static_cast<double>(nodes);
  return static_cast<double>(edges) / (n * (n - 1.0));
}

GraphStats compute_stats(const KnowledgeGraph& graph) {
  GraphStats s;
  s.nodes = graph.num_nodes();
  s.edges = graph.edges(Split::Train).size();
  s.relations = graph.num_base_relations();
  s.density = graph_density(s.nodes, s.edges);
  s.average_in_degree = s.nodes ? static_cast<double>(s.edges) / static_cast<double>(s.nodes) : 0.0;
  return s;
}

std::vector<Split> make_random_split(const KnowledgeGraph& graph, SplitRatios ratios,
                                     std::uint64_t seed) {
  for (double r : ratios)
    if (!(r >= 0.0)) throw ConfigError("split ratios must be non-negative");
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9)
    throw ConfigError("split ratios must sum to 1");

  const auto& edges = graph.edges(Split::Train);
  const std::size_t n = edges.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, 0x5b11);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<std::size_t>(std::llround(ratios[0] * static_cast<double>(n)));
  const auto n_dev = std::min(
      n - n_train, static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(n))));
  std::vector<Split> assignment(n, Split::Test);
  for (std::size_t k = 0; k < n; ++k)
    assignment[order[k]] = k < n_train ? Split::Train : k < n_train + n_dev ? Split::Dev : Split::Test;

  // Every node must be seen in training. A dev/test tuple touching an unseen
  // node moves to train; one pass suffices because coverage only grows.
  std::vector<std::uint32_t> seen(graph.num_nodes(), 0);
  for (std::size_t i = 0; i < n; ++i)
    if (assignment[i] == Split::Train) {
      ++seen[edges[i].src];
      ++seen[edges[i].dst];
    }
  for (std::size_t k = n_train; k < n; ++k) {
    const std::size_t i = order[k];
    if (seen[edges[i].src] && seen[edges[i].dst]) continue;
    assignment[i] = Split::Train;
    ++seen[edges[i].src];
    ++seen[edges[i].dst];
  }
  return assignment;
}

KnowledgeGraph apply_split(const KnowledgeGraph& graph, const std::vector<Split>& assignment) {
  const auto& edges = graph.edges(Split::Train);
  if (assignment.size() != edges.size())
    throw ConfigError("split assignment size does not match the training tuples");
  KnowledgeGraph out = graph;
  std::vector<Edge> parts[3];
  for (std::size_t i = 0; i < edges.size(); ++i)
    parts[static_cast<int>(assignment[i])].push_back(edges[i]);
  for (Split s : kAllSplits) out.set_edges(s, std::move(parts[static_cast<int>(s)]));
  return out;
}

KnowledgeGraph drop_edges_to_density(const KnowledgeGraph& graph, double target_density,
                                     std::uint64_t seed) {
  const auto stats = compute_stats(graph);
  if (!(target_density > 0.0)) throw ConfigError("target density must be positive");
  if (target_density > stats.density * (1.0 + 1e-12))
    throw ConfigError("target density " + std::to_string(target_density) +
                      " exceeds current density " + std::to_string(stats.density));
  const double n = static_cast<double>(stats.nodes);
  const auto keep = std::min<std::size_t>(
      stats.edges, static_cast<std::size_t>(std::llround(target_density * n * (n - 1.0))));
  if (keep == stats.edges) return graph;

  const auto& edges = graph.edges(Split::Train);
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, 0xd809);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(keep);
  std::sort(order.begin(), order.end());

  std::vector<Edge> kept;
  kept.reserve(keep);
  for (auto i : order) kept.push_back(edges[i]);
  KnowledgeGraph out = graph;
  out.set_edges(Split::Train, std::move(kept));
  return out;
}

}  // namespace kgc
