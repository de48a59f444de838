#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "kgc/kg/graph.hpp"

namespace kgc {

/// A node-induced slice of the training graph in local ids.
///
/// `nodes[k]` is the global id of local node k. `message_edges` feed the
/// encoder (directed training edges plus sim edges); `scoreable_edges` are the
/// decoder's targets (no sim). Both use local ids.
struct GraphView {
  std::vector<NodeId> nodes;
  std::vector<Edge> message_edges;
  std::vector<Edge> scoreable_edges;
  bool full = false;

  std::size_t num_nodes() const { return nodes.size(); }
  /// Throws if the global node is not part of the view.
  std::size_t local_id(NodeId global) const;
  bool contains(NodeId global) const { return local_of_.contains(global); }

  void index();

 private:
  std::unordered_map<NodeId, std::size_t> local_of_;
};

/// Every vocabulary node and every training edge. Sim edges are included
/// only when `with_sim` is set.
GraphView full_view(const KnowledgeGraph& graph, bool with_sim);

/// Uniform sample of `edge_budget` base training edges plus their inverses,
/// restricted to the sample's endpoints. With `with_sim`, every sim pair whose
/// endpoints were both sampled is linked in both directions. A budget at or
/// above the base edge count returns the full view.
GraphView sample_subgraph(const KnowledgeGraph& graph, std::size_t edge_budget, bool with_sim,
                          std::uint64_t seed);

}  // namespace kgc
