#include "kgc/embed/similarity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "kgc/error.hpp"
#include "kgc/rng.hpp"

namespace kgc {

UnitRows normalize_rows(const NodeEmbeddingTable& table) {
  UnitRows u;
  u.rows = table.rows;
  u.dim = table.dim;
  u.values.resize(table.rows * table.dim);
  u.valid.assign(table.rows, 0);
  for (std::size_t i = 0; i < table.rows; ++i) {
    const auto row = table.row(i);
    double sq = 0.0;
    for (float f : row) sq += static_cast<double>(f) * static_cast<double>(f);
    if (sq == 0.0) {
      ++u.zero_norm_rows;
      continue;
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (std::size_t d = 0; d < table.dim; ++d)
      u.values[i * table.dim + d] = static_cast<double>(row[d]) * inv;
    u.valid[i] = 1;
  }
  return u;
}

SimEdgeSet pairwise_topk_by_threshold(const NodeEmbeddingTable& table, double tau,
                                      std::size_t block) {
  if (block == 0) throw ConfigError("similarity block size must be at least 1");
  const UnitRows u = normalize_rows(table);
  SimEdgeSet out;
  out.tau = tau;
  out.criterion = "tau";
  out.zero_norm_rows = u.zero_norm_rows;
  out.pairs = kernels::openmp_enabled()
                  ? kernels::parallel::cosine_pairs_above(u.values, u.valid, u.rows, u.dim, tau, block)
                  : kernels::serial::cosine_pairs_above(u.values, u.valid, u.rows, u.dim, tau, block);
  return out;
}

CapChoice choose_cap_threshold(const kernels::GridCounts& counts, std::uint64_t max_new_edges) {
  if (max_new_edges == 0) throw ConfigError("edge cap must be positive");
  CapChoice c;
  c.counts = counts;
  for (std::size_t k = 0; k < kernels::kGridPoints; ++k) {
    if (counts[k] <= max_new_edges) {
      c.tau = static_cast<double>(k) / 100.0;
      c.pairs = counts[k];
      return c;
    }
  }
  c.tau = 1.0;
  c.pairs = counts[kernels::kGridPoints - 1];
  c.cap_exceeded = true;
  return c;
}

CapChoice select_threshold_cap(const NodeEmbeddingTable& table, std::uint64_t max_new_edges,
                               std::size_t block) {
  if (block == 0) throw ConfigError("similarity block size must be at least 1");
  const UnitRows u = normalize_rows(table);
  const auto counts =
      kernels::openmp_enabled()
          ? kernels::parallel::cosine_grid_counts(u.values, u.valid, u.rows, u.dim, block)
          : kernels::serial::cosine_grid_counts(u.values, u.valid, u.rows, u.dim, block);
  return choose_cap_threshold(counts, max_new_edges);
}

TailChoice tail_threshold(std::span<const double> similarities, double k) {
  if (similarities.size() < 2) throw ConfigError("tail threshold needs at least two similarities");
  const auto [lo, hi] = std::minmax_element(similarities.begin(), similarities.end());
  if (*lo == *hi) throw ConfigError("similarity distribution is degenerate (stddev 0)");
  double mean = 0.0;
  for (double s : similarities) mean += s;
  mean /= static_cast<double>(similarities.size());
  double ss = 0.0;
  for (double s : similarities) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / static_cast<double>(similarities.size() - 1));
  if (!(sd > 0.0)) throw ConfigError("similarity distribution is degenerate (stddev 0)");
  return {mean + k * sd, mean, sd, similarities.size()};
}

TailChoice select_threshold_tail(const NodeEmbeddingTable& table, std::size_t sample_pairs,
                                 std::uint64_t seed, double k) {
  const UnitRows u = normalize_rows(table);
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < u.rows; ++i)
    if (u.valid[i]) live.push_back(i);
  const std::size_t n = live.size();
  const std::uint64_t total = n < 2 ? 0 : static_cast<std::uint64_t>(n) * (n - 1) / 2;
  auto cosine = [&](std::size_t i, std::size_t j) {
    const double* a = u.values.data() + i * u.dim;
    const double* b = u.values.data() + j * u.dim;
    double s = 0.0;
    for (std::size_t d = 0; d < u.dim; ++d) s += a[d] * b[d];
    return s;
  };
  std::vector<double> sims;
  if (total <= sample_pairs) {
    sims.reserve(total);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) sims.push_back(cosine(live[a], live[b]));
  } else {
    Rng rng = make_rng(seed, 0x7a11);
    sims.reserve(sample_pairs);
    while (sims.size() < sample_pairs) {
      const auto a = uniform_index(rng, n);
      const auto b = uniform_index(rng, n);
      if (a != b) sims.push_back(cosine(live[a], live[b]));
    }
  }
  return tail_threshold(sims, k);
}

KnowledgeGraph densify(const KnowledgeGraph& graph, const SimEdgeSet& sim_edges) {
  std::vector<Edge> pairs = graph.sim_pairs();
  std::set<std::pair<NodeId, NodeId>> present;
  for (const auto& e : pairs) present.emplace(e.src, e.dst);
  for (const auto& p : sim_edges.pairs) {
    if (p.first >= graph.num_nodes() || p.second >= graph.num_nodes())
      throw ConfigError("sim pair references node outside the graph");
    if (p.first == p.second) continue;
    const auto key = std::minmax(p.first, p.second);
    if (present.insert(key).second) pairs.push_back({key.first, graph.sim_relation(), key.second});
  }
  KnowledgeGraph out = graph;
  out.set_sim_pairs(std::move(pairs));
  return out;
}

void write_sim_pairs(const std::filesystem::path& path, const KnowledgeGraph& graph,
                     const SimEdgeSet& sim_edges) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& p : sim_edges.pairs)
    out << fmt::format("{}\t{}\t{:.6f}\n", graph.phrase(p.first), graph.phrase(p.second),
                       p.similarity);
}

SimEdgeSet read_sim_pairs(const std::filesystem::path& path, const KnowledgeGraph& graph) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open sim pair file " + path.string());
  SimEdgeSet set;
  set.criterion = "file";
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos)
      fail("expected 3 tab-separated fields");
    const auto a = graph.find_node(normalize_phrase(line.substr(0, t1)));
    const auto b = graph.find_node(normalize_phrase(line.substr(t1 + 1, t2 - t1 - 1)));
    if (!a || !b) fail("phrase not in the graph vocabulary");
    double sim = 0.0;
    const char* first = line.data() + t2 + 1;
    const char* last = line.data() + line.size();
    const auto [ptr, ec] = std::from_chars(first, last, sim);
    if (ec != std::errc() || ptr != last) fail("similarity is not a number");
    const auto [lo, hi] = std::minmax(*a, *b);
    set.pairs.push_back({lo, hi, sim});
  }
  std::sort(set.pairs.begin(), set.pairs.end(),
            [](const SimPair& x, const SimPair& y) {
              return std::tie(x.first, x.second) < std::tie(y.first, y.second);
            });
  return set;
}

}  // namespace kgc
