#include "kgc/kg/graph.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>

#include "kgc/error.hpp"

namespace kgc {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "dev" || name == "valid") return Split::Dev;
  if (name == "test") return Split::Test;
  throw ConfigError("unknown split '" + std::string(name) + "' (expected train, dev or test)");
}

std::string normalize_phrase(std::string_view raw) {
  constexpr std::string_view ws = " \t\r\n\v\f";
  const auto b = raw.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = raw.find_last_not_of(ws);
  const std::string_view trimmed = raw.substr(b, e - b + 1);

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  const auto src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(trimmed.data(), static_cast<std::int32_t>(trimmed.size())));
  if (nfc->isNormalized(src, status) && U_SUCCESS(status)) return std::string(trimmed);
  status = U_ZERO_ERROR;
  const icu::UnicodeString out = nfc->normalize(src, status);
  if (U_FAILURE(status)) throw FormatError("phrase is not valid UTF-8: " + std::string(trimmed));
  std::string utf8;
  out.toUTF8String(utf8);
  return utf8;
}

std::span<const Adjacency::Neighbor> Adjacency::incoming(NodeId n) const {
  return {in_neighbors.data() + in_offsets[n], in_offsets[n + 1] - in_offsets[n]};
}

std::span<const Adjacency::Neighbor> Adjacency::outgoing(NodeId n) const {
  return {out_neighbors.data() + out_offsets[n], out_offsets[n + 1] - out_offsets[n]};
}

Adjacency Adjacency::build(std::size_t num_nodes, std::span<const Edge> edges) {
  Adjacency a;
  a.in_offsets.assign(num_nodes + 1, 0);
  a.out_offsets.assign(num_nodes + 1, 0);
  for (const auto& e : edges) {
    ++a.in_offsets[e.dst + 1];
    ++a.out_offsets[e.src + 1];
  }
  for (std::size_t i = 0; i < num_nodes; ++i) {
    a.in_offsets[i + 1] += a.in_offsets[i];
    a.out_offsets[i + 1] += a.out_offsets[i];
  }
  a.in_neighbors.resize(edges.size());
  a.out_neighbors.resize(edges.size());
  auto in_fill = a.in_offsets;
  auto out_fill = a.out_offsets;
  for (const auto& e : edges) {
    a.in_neighbors[in_fill[e.dst]++] = {e.src, e.rel};
    a.out_neighbors[out_fill[e.src]++] = {e.dst, e.rel};
  }
  return a;
}

std::optional<NodeId> KnowledgeGraph::find_node(std::string_view phrase) const {
  const auto it = node_ids_.find(std::string(phrase));
  if (it == node_ids_.end()) return std::nullopt;
  return it->second;
}

RelId KnowledgeGraph::inverse_of(RelId r) const {
  const auto base = static_cast<RelId>(num_base_relations());
  if (r >= 2 * base) throw ConfigError("relation " + std::to_string(r) + " has no inverse");
  return r < base ? r + base : r - base;
}

bool KnowledgeGraph::is_inverse(RelId r) const {
  return r >= num_base_relations() && r < 2 * num_base_relations();
}

std::string KnowledgeGraph::relation_name(RelId r) const {
  const std::size_t base = num_base_relations();
  if (r < base) return relation_names_[r];
  if (r < 2 * base) return relation_names_[r - base] + std::string(kInverseSuffix);
  if (r == 2 * base) return std::string(kSimRelation);
  throw ConfigError("relation id " + std::to_string(r) + " out of range");
}

std::optional<RelId> KnowledgeGraph::find_relation(std::string_view name) const {
  if (name == kSimRelation) return sim_relation();
  if (const auto it = relation_ids_.find(std::string(name)); it != relation_ids_.end())
    return it->second;
  if (name.ends_with(kInverseSuffix)) {
    const auto base = name.substr(0, name.size() - kInverseSuffix.size());
    if (const auto it = relation_ids_.find(std::string(base)); it != relation_ids_.end())
      return inverse_of(it->second);
  }
  return std::nullopt;
}

std::vector<Edge> KnowledgeGraph::directed_train_edges() const {
  const auto& base = edges(Split::Train);
  std::vector<Edge> out;
  out.reserve(2 * base.size());
  out.insert(out.end(), base.begin(), base.end());
  for (const auto& e : base) out.push_back({e.dst, inverse_of(e.rel), e.src});
  return out;
}

std::vector<Edge> KnowledgeGraph::encoder_edges() const {
  auto out = directed_train_edges();
  out.reserve(out.size() + 2 * sim_pairs_.size());
  for (const auto& p : sim_pairs_) {
    out.push_back({p.src, sim_relation(), p.dst});
    out.push_back({p.dst, sim_relation(), p.src});
  }
  return out;
}

NodeId KnowledgeGraph::intern_node(std::string phrase) {
  const auto next = static_cast<NodeId>(phrases_.size());
  auto [it, inserted] = node_ids_.try_emplace(phrase, next);
  if (inserted) phrases_.push_back(std::move(phrase));
  return it->second;
}

RelId KnowledgeGraph::intern_relation(std::string name) {
  if (const auto it = relation_ids_.find(name); it != relation_ids_.end()) return it->second;
  if (name.empty()) throw FormatError("empty relation name");
  if (name == kSimRelation)
    throw FormatError("relation name '" + name + "' is reserved for similarity edges");
  if (name.ends_with(kInverseSuffix))
    throw FormatError("relation name '" + name + "' collides with the reserved inverse suffix '" +
                      std::string(kInverseSuffix) + "'");
  if (!sim_pairs_.empty())
    throw Error("cannot add relation '" + name + "' after sim pairs were attached");
  const auto id = static_cast<RelId>(relation_names_.size());
  relation_ids_.emplace(name, id);
  relation_names_.push_back(std::move(name));
  return id;
}

void KnowledgeGraph::add_edge(Split s, Edge e) {
  if (e.src >= num_nodes() || e.dst >= num_nodes())
    throw ConfigError("edge references an unknown node");
  if (e.rel >= num_base_relations())
    throw ConfigError("only base relations may be stored as split edges");
  edges_[static_cast<int>(s)].push_back(e);
}

void KnowledgeGraph::set_edges(Split s, std::vector<Edge> edges) {
  for (const auto& e : edges)
    if (e.src >= num_nodes() || e.dst >= num_nodes() || e.rel >= num_base_relations())
      throw ConfigError("set_edges: edge out of vocabulary range");
  edges_[static_cast<int>(s)] = std::move(edges);
}

void KnowledgeGraph::set_sim_pairs(std::vector<Edge> pairs) {
  for (auto& p : pairs) {
    if (p.src >= num_nodes() || p.dst >= num_nodes())
      throw ConfigError("sim pair references an unknown node");
    if (p.src == p.dst) throw ConfigError("sim pair is a self-pair");
    if (p.src > p.dst) std::swap(p.src, p.dst);
    p.rel = sim_relation();
  }
  sim_pairs_ = std::move(pairs);
}

bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
  return a.phrases_ == b.phrases_ && a.relation_names_ == b.relation_names_ &&
         a.edges_[0] == b.edges_[0] && a.edges_[1] == b.edges_[1] &&
         a.edges_[2] == b.edges_[2] && a.sim_pairs_ == b.sim_pairs_;
}

}  // namespace kgc
