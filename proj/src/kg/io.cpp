#include "kgc/kg/io.hpp"

#include <fstream>

#include "kgc/error.hpp"
#include "kgc/io/binary.hpp"

namespace kgc {

namespace {

constexpr std::size_t kMaxRejectExamples = 10;
constexpr char kGraphMagic[4] = {'K', 'G', 'G', '1'};
constexpr std::uint32_t kGraphVersion = 1;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

void load_tsv(const std::filesystem::path& path, Split split, KnowledgeGraph& graph,
              LoadReport& report) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (fields.size() != 3 && fields.size() != 4)
      throw FormatError(where + ": expected 3 or 4 tab-separated fields, got " +
                        std::to_string(fields.size()));
    std::string relation = normalize_phrase(fields[0]);
    if (relation.empty()) throw FormatError(where + ": empty relation name");
    std::string source = normalize_phrase(fields[1]);
    std::string target = normalize_phrase(fields[2]);
    ++report.rows;
    if (source.empty() || target.empty()) {
      ++report.rejected_empty_phrase;
      if (report.rejected_examples.size() < kMaxRejectExamples)
        report.rejected_examples.push_back(where);
      continue;
    }
    RelId rel;
    try {
      rel = graph.intern_relation(std::move(relation));
    } catch (const FormatError& e) {
      throw FormatError(where + ": " + e.what());
    }
    const NodeId src = graph.intern_node(std::move(source));
    const NodeId dst = graph.intern_node(std::move(target));
    graph.add_edge(split, {src, rel, dst});
  }
}

KnowledgeGraph load_dataset(const std::filesystem::path& dir, LoadReport* report) {
  LoadReport local;
  LoadReport& r = report ? *report : local;
  KnowledgeGraph graph;
  const auto train = dir / "train.txt";
  if (!std::filesystem::exists(train)) throw Error("dataset " + dir.string() + " has no train.txt");
  load_tsv(train, Split::Train, graph, r);
  for (const char* name : {"dev.txt", "valid.txt"}) {
    if (std::filesystem::exists(dir / name)) {
      load_tsv(dir / name, Split::Dev, graph, r);
      break;
    }
  }
  if (std::filesystem::exists(dir / "test.txt")) load_tsv(dir / "test.txt", Split::Test, graph, r);
  return graph;
}

KnowledgeGraph load_tuples(const std::filesystem::path& path, LoadReport* report) {
  LoadReport local;
  KnowledgeGraph graph;
  load_tsv(path, Split::Train, graph, report ? *report : local);
  return graph;
}

void write_tsv(const std::filesystem::path& path, const KnowledgeGraph& graph, Split split) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& e : graph.edges(split))
    out << graph.relation_name(e.rel) << '\t' << graph.phrase(e.src) << '\t' << graph.phrase(e.dst)
        << '\n';
}

namespace {

void write_string(std::ostream& out, const std::string& s) {
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  const auto n = io::read_le<std::uint32_t>(in, "string length");
  std::string s(n, '\0');
  if (!in.read(s.data(), n)) throw FormatError("graph cache: truncated string");
  return s;
}

void write_edges(std::ostream& out, const std::vector<Edge>& edges) {
  io::write_le<std::uint64_t>(out, edges.size());
  for (const auto& e : edges) {
    io::write_le<std::uint32_t>(out, e.src);
    io::write_le<std::uint32_t>(out, e.rel);
    io::write_le<std::uint32_t>(out, e.dst);
  }
}

std::vector<Edge> read_edges(std::istream& in) {
  const auto n = io::read_le<std::uint64_t>(in, "edge count");
  std::vector<Edge> edges(n);
  for (auto& e : edges) {
    e.src = io::read_le<std::uint32_t>(in, "edge");
    e.rel = io::read_le<std::uint32_t>(in, "edge");
    e.dst = io::read_le<std::uint32_t>(in, "edge");
  }
  return edges;
}

}  // namespace

void save_graph_cache(const std::filesystem::path& path, const KnowledgeGraph& graph) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  io::write_magic(out, kGraphMagic);
  io::write_le<std::uint32_t>(out, kGraphVersion);
  io::write_le<std::uint64_t>(out, graph.num_nodes());
  for (const auto& p : graph.phrases()) write_string(out, p);
  io::write_le<std::uint64_t>(out, graph.num_base_relations());
  for (const auto& r : graph.base_relation_names()) write_string(out, r);
  for (Split s : kAllSplits) write_edges(out, graph.edges(s));
  write_edges(out, graph.sim_pairs());
}

KnowledgeGraph load_graph_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open graph cache " + path.string());
  io::expect_magic(in, kGraphMagic, path.string());
  if (io::read_le<std::uint32_t>(in, "version") != kGraphVersion)
    throw FormatError(path.string() + ": unsupported graph cache version");
  KnowledgeGraph graph;
  const auto nodes = io::read_le<std::uint64_t>(in, "node count");
  for (std::uint64_t i = 0; i < nodes; ++i) graph.intern_node(read_string(in));
  const auto rels = io::read_le<std::uint64_t>(in, "relation count");
  for (std::uint64_t i = 0; i < rels; ++i) graph.intern_relation(read_string(in));
  if (graph.num_nodes() != nodes || graph.num_base_relations() != rels)
    throw FormatError(path.string() + ": duplicate vocabulary entries");
  for (Split s : kAllSplits) graph.set_edges(s, read_edges(in));
  graph.set_sim_pairs(read_edges(in));
  return graph;
}

}  // namespace kgc
