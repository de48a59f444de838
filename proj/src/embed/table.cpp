#include "kgc/embed/table.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include "kgc/error.hpp"
#include "kgc/io/binary.hpp"

namespace kgc {

std::filesystem::path default_phrase_sidecar(const std::filesystem::path& binary) {
  auto p = binary;
  p.replace_extension(".txt");
  return p;
}

void write_embedding_file(const std::filesystem::path& binary, const NodeEmbeddingTable& table) {
  if (table.values.size() != table.rows * table.dim)
    throw ShapeError("embedding table: value count does not match rows x dim");
  std::ofstream out(binary, std::ios::binary);
  if (!out) throw Error("cannot open " + binary.string() + " for writing");
  io::write_magic(out, kEmbeddingMagic);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.rows));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.dim));
  for (float f : table.values) io::write_f32(out, f);
  if (!out) throw Error("write failed: " + binary.string());
}

NodeEmbeddingTable read_embedding_file(const std::filesystem::path& binary) {
  std::ifstream in(binary, std::ios::binary);
  if (!in) throw Error("cannot open embedding file " + binary.string());
  io::expect_magic(in, kEmbeddingMagic, binary.string());
  NodeEmbeddingTable t;
  t.rows = io::read_le<std::uint32_t>(in, "row count");
  t.dim = io::read_le<std::uint32_t>(in, "dimension");
  if (t.dim == 0) throw FormatError(binary.string() + ": embedding dimension is 0");
  t.values.resize(t.rows * t.dim);
  for (auto& f : t.values) f = io::read_f32(in, "embedding payload");
  if (in.peek() != std::char_traits<char>::eof())
    throw FormatError(binary.string() + ": trailing bytes after " + std::to_string(t.rows) +
                      " rows");
  for (std::size_t i = 0; i < t.rows; ++i)
    for (float f : t.row(i))
      if (!std::isfinite(f))
        throw FormatError(binary.string() + ": row " + std::to_string(i) + " is not finite");
  return t;
}

void write_phrase_file(const std::filesystem::path& path, std::span<const std::string> phrases) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& p : phrases) out << p << '\n';
}

std::vector<std::string> read_phrase_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open phrase file " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(normalize_phrase(line));
  }
  return out;
}

namespace {

std::string offenders(const std::vector<std::string>& names, std::size_t total) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) s += (i ? ", \"" : "\"") + names[i] + "\"";
  if (total > names.size()) s += ", ... (" + std::to_string(total) + " total)";
  return s;
}

}  // namespace

NodeEmbeddingTable load_embeddings(const std::filesystem::path& binary,
                                   const std::filesystem::path& phrases,
                                   const KnowledgeGraph& graph) {
  const NodeEmbeddingTable file = read_embedding_file(binary);
  const auto names = read_phrase_file(phrases);
  if (names.size() != file.rows)
    throw FormatError(phrases.string() + ": " + std::to_string(names.size()) +
                      " phrases for " + std::to_string(file.rows) + " embedding rows");

  constexpr std::size_t kShown = 10;
  NodeEmbeddingTable out;
  out.rows = graph.num_nodes();
  out.dim = file.dim;
  out.values.assign(out.rows * out.dim, 0.0f);
  std::vector<std::uint8_t> filled(out.rows, 0);
  std::vector<std::string> surplus;
  std::size_t surplus_total = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto id = graph.find_node(names[i]);
    if (!id) {
      if (surplus.size() < kShown) surplus.push_back(names[i]);
      ++surplus_total;
      continue;
    }
    const auto src = file.row(i);
    float* dst = out.values.data() + static_cast<std::size_t>(*id) * out.dim;
    if (filled[*id]) {
      if (!std::equal(src.begin(), src.end(), dst))
        throw FormatError(phrases.string() + ": phrase \"" + names[i] +
                          "\" appears twice with different rows");
      continue;
    }
    std::copy(src.begin(), src.end(), dst);
    filled[*id] = 1;
  }
  if (surplus_total)
    throw FormatError("embedding file has phrases absent from the graph: " +
                      offenders(surplus, surplus_total));
  std::vector<std::string> missing;
  std::size_t missing_total = 0;
  for (NodeId n = 0; n < out.rows; ++n)
    if (!filled[n]) {
      if (missing.size() < kShown) missing.push_back(graph.phrase(n));
      ++missing_total;
    }
  if (missing_total)
    throw FormatError("graph nodes missing from the embedding file: " +
                      offenders(missing, missing_total));
  return out;
}

}  // namespace kgc
