#include "kgc/encoder/view.hpp"

#include <algorithm>
#include <numeric>

#include "kgc/error.hpp"
#include "kgc/rng.hpp"

namespace kgc {

std::size_t GraphView::local_id(NodeId global) const {
  const auto it = local_of_.find(global);
  if (it == local_of_.end())
    throw ConfigError("node " + std::to_string(global) + " is not part of the graph view");
  return it->second;
}

void GraphView::index() {
  local_of_.clear();
  local_of_.reserve(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) local_of_.emplace(nodes[k], k);
}

namespace {

void sort_by_destination(std::vector<Edge>& edges) {
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& a, const Edge& b) { return a.dst < b.dst; });
}

}  // namespace

GraphView full_view(const KnowledgeGraph& graph, bool with_sim) {
  GraphView v;
  v.full = true;
  v.nodes.resize(graph.num_nodes());
  std::iota(v.nodes.begin(), v.nodes.end(), NodeId{0});
  v.scoreable_edges = graph.directed_train_edges();
  v.message_edges = with_sim ? graph.encoder_edges() : v.scoreable_edges;
  sort_by_destination(v.message_edges);
  v.index();
  return v;
}

GraphView sample_subgraph(const KnowledgeGraph& graph, std::size_t edge_budget, bool with_sim,
                          std::uint64_t seed) {
  if (edge_budget == 0) throw ConfigError("subgraph edge budget must be at least 1");
  const auto& base = graph.edges(Split::Train);
  if (edge_budget >= base.size()) return full_view(graph, with_sim);

  std::vector<std::size_t> pick(base.size());
  std::iota(pick.begin(), pick.end(), 0);
  Rng rng = make_rng(seed, 0x5a3b);
  // Partial Fisher-Yates: the first edge_budget slots are a uniform sample.
  for (std::size_t i = 0; i < edge_budget; ++i)
    std::swap(pick[i], pick[i + uniform_index(rng, pick.size() - i)]);
  pick.resize(edge_budget);
  std::sort(pick.begin(), pick.end());

  GraphView v;
  for (auto i : pick) {
    v.nodes.push_back(base[i].src);
    v.nodes.push_back(base[i].dst);
  }
  std::sort(v.nodes.begin(), v.nodes.end());
  v.nodes.erase(std::unique(v.nodes.begin(), v.nodes.end()), v.nodes.end());
  v.index();

  for (auto i : pick) {
    const Edge& e = base[i];
    v.scoreable_edges.push_back({static_cast<NodeId>(v.local_id(e.src)), e.rel,
                                 static_cast<NodeId>(v.local_id(e.dst))});
  }
  const std::size_t forward = v.scoreable_edges.size();
  for (std::size_t k = 0; k < forward; ++k) {
    const Edge& e = v.scoreable_edges[k];
    v.scoreable_edges.push_back({e.dst, graph.inverse_of(e.rel), e.src});
  }
  v.message_edges = v.scoreable_edges;
  if (with_sim) {
    for (const auto& p : graph.sim_pairs()) {
      if (!v.contains(p.src) || !v.contains(p.dst)) continue;
      const auto a = static_cast<NodeId>(v.local_id(p.src));
      const auto b = static_cast<NodeId>(v.local_id(p.dst));
      v.message_edges.push_back({a, graph.sim_relation(), b});
      v.message_edges.push_back({b, graph.sim_relation(), a});
    }
  }
  sort_by_destination(v.message_edges);
  return v;
}

}  // namespace kgc
