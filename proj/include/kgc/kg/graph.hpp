#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgc {

using NodeId = std::uint32_t;
using RelId = std::uint32_t;

struct Edge {
  NodeId src;
  RelId rel;
  NodeId dst;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class Split { Train = 0, Dev = 1, Test = 2 };
inline constexpr Split kAllSplits[] = {Split::Train, Split::Dev, Split::Test};

std::string_view split_name(Split s);
Split parse_split(std::string_view name);

inline constexpr std::string_view kInverseSuffix = "_inv";
inline constexpr std::string_view kSimRelation = "sim";

/// Trims surrounding whitespace and applies Unicode NFC. Node identity is the
/// exact result; no case folding.
std::string normalize_phrase(std::string_view raw);

/// Typed neighbor lists in CSR form, indexed by node.
struct Adjacency {
  struct Neighbor {
    NodeId node;
    RelId rel;
  };
  std::vector<std::size_t> in_offsets;   // size num_nodes + 1
  std::vector<Neighbor> in_neighbors;    // sources of edges into each node
  std::vector<std::size_t> out_offsets;
  std::vector<Neighbor> out_neighbors;   // targets of edges out of each node

  std::span<const Neighbor> incoming(NodeId n) const;
  std::span<const Neighbor> outgoing(NodeId n) const;
  std::size_t entries() const { return in_neighbors.size(); }

  static Adjacency build(std::size_t num_nodes, std::span<const Edge> edges);
};

/// Node and relation vocabularies plus per-split tuples.
///
/// Relation ids: base relations occupy [0, R), the inverse of r is r + R, and
/// the reserved `sim` relation is 2R. Only base tuples are stored per split;
/// inverse training edges are derived, and `sim` pairs are stored once and
/// expanded in both directions on demand. The graph is immutable once built.
class KnowledgeGraph {
 public:
  std::size_t num_nodes() const { return phrases_.size(); }
  const std::string& phrase(NodeId n) const { return phrases_.at(n); }
  const std::vector<std::string>& phrases() const { return phrases_; }
  std::optional<NodeId> find_node(std::string_view phrase) const;

  std::size_t num_base_relations() const { return relation_names_.size(); }
  /// Base + inverse, the relations a decoder scores.
  std::size_t num_directed_relations() const { return 2 * num_base_relations(); }
  /// Base + inverse + sim, the relations the encoder weighs.
  std::size_t num_relations() const { return 2 * num_base_relations() + 1; }
  RelId sim_relation() const { return static_cast<RelId>(2 * num_base_relations()); }
  RelId inverse_of(RelId r) const;
  bool is_inverse(RelId r) const;
  std::string relation_name(RelId r) const;
  std::optional<RelId> find_relation(std::string_view name) const;
  const std::vector<std::string>& base_relation_names() const { return relation_names_; }

  const std::vector<Edge>& edges(Split s) const { return edges_[static_cast<int>(s)]; }
  /// Base training edges followed by their inverses (same order).
  std::vector<Edge> directed_train_edges() const;
  /// Unordered sim pairs (src < dst), relation = sim_relation().
  const std::vector<Edge>& sim_pairs() const { return sim_pairs_; }
  /// Edges the encoder passes messages along: directed training edges and
  /// both directions of every sim pair. Never contains dev/test edges.
  std::vector<Edge> encoder_edges() const;
  /// Scoreable edges: directed training edges, no sim.
  std::vector<Edge> decoder_edges() const { return directed_train_edges(); }
  Adjacency encoder_adjacency() const { return Adjacency::build(num_nodes(), encoder_edges()); }

  // -- construction ---------------------------------------------------------
  /// Returns the id of an already-normalised phrase, adding it if new.
  NodeId intern_node(std::string phrase);
  /// Returns the id of a base relation, adding it if new. Rejects reserved names.
  RelId intern_relation(std::string name);
  void add_edge(Split s, Edge e);
  void set_edges(Split s, std::vector<Edge> edges);
  void set_sim_pairs(std::vector<Edge> pairs);

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b);

 private:
  std::vector<std::string> phrases_;
  std::unordered_map<std::string, NodeId> node_ids_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, RelId> relation_ids_;
  std::vector<Edge> edges_[3];
  std::vector<Edge> sim_pairs_;
};

}  // namespace kgc
