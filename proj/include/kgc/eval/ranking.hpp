#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "kgc/kg/graph.hpp"

namespace kgc {

/// One ranking question: which candidate completes (src, rel, ?), answer gold.
struct Query {
  NodeId src = 0;
  RelId rel = 0;
  NodeId gold = 0;
};

/// Every known answer of (entity, directed relation) across train, dev and
/// test. Each tuple enters under (e1, rel) -> e2 and (e2, rel_inv) -> e1.
class FilterIndex {
 public:
  static FilterIndex build(const KnowledgeGraph& graph);

  /// Sorted, duplicate-free answers; empty when the prefix is unknown.
  std::span<const NodeId> answers(NodeId src, RelId rel) const;
  std::size_t prefixes() const { return answers_.size(); }

 private:
  std::unordered_map<std::uint64_t, std::vector<NodeId>> answers_;
};

/// Rank of scores[gold] after removing the candidates listed in `filter`
/// (an occurrence of gold itself in `filter` is ignored). Ties share the mean
/// rank of their group: 1 + #higher + #tied / 2.
double filtered_rank(std::span<const double> scores, std::size_t gold,
                     std::span<const NodeId> filter);

struct Metrics {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  std::size_t queries = 0;
};

Metrics summarize(std::span<const double> ranks);

/// Tail queries predict e2 from (e1, rel); head queries predict e1 from
/// (e2, rel_inv). `average` is the mean of the two directions' metrics.
struct RankingReport {
  Metrics tail;
  Metrics head;
  Metrics average;
  std::vector<double> tail_ranks;
  std::vector<double> head_ranks;
};

class LinkScorer {
 public:
  virtual ~LinkScorer() = default;
  virtual std::size_t num_candidates() const = 0;
  /// Fills out[q * num_candidates() + c] with the score of candidate c for
  /// query q. Higher is better.
  virtual void score(std::span<const Query> queries, std::span<double> out) const = 0;
};

/// Tail then head queries of a split, in tuple order.
std::vector<Query> tail_queries(const KnowledgeGraph& graph, Split split);
std::vector<Query> head_queries(const KnowledgeGraph& graph, Split split);

RankingReport evaluate(const LinkScorer& scorer, const KnowledgeGraph& graph, Split split,
                       const FilterIndex& filter, std::size_t batch_size = 128);

/// Filtered ranks for a query list, scored in batches of `batch_size`.
std::vector<double> rank_queries(const LinkScorer& scorer, std::span<const Query> queries,
                                 const FilterIndex& filter, std::size_t batch_size);

/// Spearman's rho with average ranks for ties. Throws on fewer than two
/// points or a constant input.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace kgc
