#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kgc/kg/graph.hpp"

namespace kgc {

struct LoadReport {
  std::size_t rows = 0;
  std::size_t rejected_empty_phrase = 0;
  /// "file:line" of the first few rejected rows.
  std::vector<std::string> rejected_examples;
};

/// Appends the rows of one TSV file (relation, source, target[, weight]) to
/// the graph under the given split. Throws FormatError on a malformed row.
void load_tsv(const std::filesystem::path& path, Split split, KnowledgeGraph& graph,
              LoadReport& report);

/// Loads a dataset directory holding train.txt and optionally dev.txt and
/// test.txt (also accepted: valid.txt). The vocabulary spans all splits.
KnowledgeGraph load_dataset(const std::filesystem::path& dir, LoadReport* report = nullptr);

/// Loads a single TSV file as the training split.
KnowledgeGraph load_tuples(const std::filesystem::path& path, LoadReport* report = nullptr);

/// Writes one split as TSV rows in the input format.
void write_tsv(const std::filesystem::path& path, const KnowledgeGraph& graph, Split split);

// Graph cache: "KGG1" + u32 version, then vocabularies, per-split base edges
// and sim pairs. Reloading reproduces every id.
void save_graph_cache(const std::filesystem::path& path, const KnowledgeGraph& graph);
KnowledgeGraph load_graph_cache(const std::filesystem::path& path);

}  // namespace kgc
