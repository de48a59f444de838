#include "kgc/eval/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kgc/error.hpp"

namespace kgc {

namespace {

std::uint64_t prefix_key(NodeId src, RelId rel) {
  return (static_cast<std::uint64_t>(src) << 32) | rel;
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericError("spearman: input is constant");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

FilterIndex FilterIndex::build(const KnowledgeGraph& graph) {
  FilterIndex f;
  for (Split s : kAllSplits) {
    for (const auto& e : graph.edges(s)) {
      f.answers_[prefix_key(e.src, e.rel)].push_back(e.dst);
      f.answers_[prefix_key(e.dst, graph.inverse_of(e.rel))].push_back(e.src);
    }
  }
  for (auto& [key, v] : f.answers_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return f;
}

std::span<const NodeId> FilterIndex::answers(NodeId src, RelId rel) const {
  const auto it = answers_.find(prefix_key(src, rel));
  if (it == answers_.end()) return {};
  return it->second;
}

double filtered_rank(std::span<const double> scores, std::size_t gold,
                     std::span<const NodeId> filter) {
  if (gold >= scores.size())
    throw ConfigError("filtered_rank: gold " + std::to_string(gold) + " outside " +
                      std::to_string(scores.size()) + " candidates");
  const double g = scores[gold];
  if (std::isnan(g)) throw NumericError("filtered_rank: gold score is NaN");
  std::size_t higher = 0, tied = 0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (j == gold) continue;
    higher += scores[j] > g;
    tied += scores[j] == g;
  }
  for (NodeId f : filter) {
    if (f == gold) continue;
    if (f >= scores.size())
      throw ConfigError("filtered_rank: filtered id " + std::to_string(f) + " outside candidates");
    higher -= scores[f] > g;
    tied -= scores[f] == g;
  }
  return 1.0 + static_cast<double>(higher) + 0.5 * static_cast<double>(tied);
}

Metrics summarize(std::span<const double> ranks) {
  Metrics m;
  m.queries = ranks.size();
  if (ranks.empty()) return m;
  for (double r : ranks) {
    m.mrr += 1.0 / r;
    m.hits1 += r <= 1.0;
    m.hits3 += r <= 3.0;
    m.hits10 += r <= 10.0;
  }
  const double n = static_cast<double>(ranks.size());
  m.mrr /= n;
  m.hits1 /= n;
  m.hits3 /= n;
  m.hits10 /= n;
  return m;
}

std::vector<Query> tail_queries(const KnowledgeGraph& graph, Split split) {
  std::vector<Query> q;
  for (const auto& e : graph.edges(split)) q.push_back({e.src, e.rel, e.dst});
  return q;
}

std::vector<Query> head_queries(const KnowledgeGraph& graph, Split split) {
  std::vector<Query> q;
  for (const auto& e : graph.edges(split)) q.push_back({e.dst, graph.inverse_of(e.rel), e.src});
  return q;
}

std::vector<double> rank_queries(const LinkScorer& scorer, std::span<const Query> queries,
                                 const FilterIndex& filter, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("evaluation batch size must be positive");
  const std::size_t n = scorer.num_candidates();
  std::vector<double> ranks(queries.size());
  std::vector<double> scores;
  for (std::size_t begin = 0; begin < queries.size(); begin += batch_size) {
    const auto batch = queries.subspan(begin, std::min(batch_size, queries.size() - begin));
    scores.assign(batch.size() * n, 0.0);
    scorer.score(batch, scores);
    for (std::size_t q = 0; q < batch.size(); ++q) {
      ranks[begin + q] = filtered_rank(std::span<const double>(scores).subspan(q * n, n),
                                       batch[q].gold, filter.answers(batch[q].src, batch[q].rel));
    }
  }
  return ranks;
}

RankingReport evaluate(const LinkScorer& scorer, const KnowledgeGraph& graph, Split split,
                       const FilterIndex& filter, std::size_t batch_size) {
  if (graph.edges(split).empty())
    throw ConfigError("cannot evaluate the empty " + std::string(split_name(split)) + " split");
  RankingReport r;
  r.tail_ranks = rank_queries(scorer, tail_queries(graph, split), filter, batch_size);
  r.head_ranks = rank_queries(scorer, head_queries(graph, split), filter, batch_size);
  r.tail = summarize(r.tail_ranks);
  r.head = summarize(r.head_ranks);
  r.average.queries = r.tail.queries + r.head.queries;
  r.average.mrr = 0.5 * (r.tail.mrr + r.head.mrr);
  r.average.hits1 = 0.5 * (r.tail.hits1 + r.head.hits1);
  r.average.hits3 = 0.5 * (r.tail.hits3 + r.head.hits3);
  r.average.hits10 = 0.5 * (r.tail.hits10 + r.head.hits10);
  return r;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("spearman: inputs differ in length");
  if (x.size() < 2) throw ConfigError("spearman: need at least two points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

}  // namespace kgc
