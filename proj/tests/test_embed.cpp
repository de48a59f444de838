#include <bit>
#include <cmath>
#include <fstream>

#include "gtest/gtest.h"
#include "kgc/embed/similarity.hpp"
#include "kgc/embed/table.hpp"
#include "kgc/error.hpp"
#include "kgc/rng.hpp"
#include "toy.hpp"

using namespace kgc;
using kgc::testing::gaussian_table;
using kgc::testing::random_kg;
using kgc::testing::scratch_dir;

namespace {

// Writes a KGE1 file byte by byte, independent of the library writer.
void write_kge1_bytes(const std::filesystem::path& path, std::uint32_t rows, std::uint32_t dim,
                      const std::vector<float>& values, std::size_t extra_bytes = 0) {
  std::ofstream out(path, std::ios::binary);
  out.write("KGE1", 4);
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  u32(rows);
  u32(dim);
  for (float f : values) u32(std::bit_cast<std::uint32_t>(f));
  for (std::size_t i = 0; i < extra_bytes; ++i) out.put('\0');
}

double brute_cosine(const NodeEmbeddingTable& t, std::size_t i, std::size_t j) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t d = 0; d < t.dim; ++d) {
    const double a = t.row(i)[d], b = t.row(j)[d];
    ab += a * b;
    aa += a * a;
    bb += b * b;
  }
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

std::vector<double> brute_all_pairs(const NodeEmbeddingTable& t) {
  std::vector<double> out;
  for (std::size_t i = 0; i < t.rows; ++i)
    for (std::size_t j = i + 1; j < t.rows; ++j) out.push_back(brute_cosine(t, i, j));
  return out;
}

/// Unit vectors in the plane at the given angles (radians).
NodeEmbeddingTable planar(const std::vector<double>& angles) {
  NodeEmbeddingTable t;
  t.rows = angles.size();
  t.dim = 2;
  for (double a : angles) {
    t.values.push_back(static_cast<float>(std::cos(a)));
    t.values.push_back(static_cast<float>(std::sin(a)));
  }
  return t;
}

}  // namespace

TEST(EmbeddingFile, ReadsIndependentlyWrittenBytes) {
  const auto dir = scratch_dir("kge-read");
  const std::vector<float> v{0.5f, -1.25f, 3.0f, 1e-7f, -0.0f, 42.0f};
  write_kge1_bytes(dir / "e.bin", 3, 2, v);
  const auto t = read_embedding_file(dir / "e.bin");
  EXPECT_EQ(t.rows, 3u);
  EXPECT_EQ(t.dim, 2u);
  ASSERT_EQ(t.values.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    EXPECT_EQ(std::bit_cast<std::uint32_t>(t.values[i]), std::bit_cast<std::uint32_t>(v[i]));
}

TEST(EmbeddingFile, WriterIsBitExact) {
  const auto dir = scratch_dir("kge-write");
  const auto t = gaussian_table(7, 5, 3);
  write_embedding_file(dir / "lib.bin", t);
  write_kge1_bytes(dir / "ref.bin", 7, 5, t.values);
  std::ifstream a(dir / "lib.bin", std::ios::binary), b(dir / "ref.bin", std::ios::binary);
  const std::string sa{std::istreambuf_iterator<char>(a), {}};
  const std::string sb{std::istreambuf_iterator<char>(b), {}};
  EXPECT_EQ(sa, sb);
}

TEST(EmbeddingFile, RejectsMalformedFiles) {
  const auto dir = scratch_dir("kge-bad");
  write_kge1_bytes(dir / "dim0.bin", 2, 0, {});
  EXPECT_THROW(read_embedding_file(dir / "dim0.bin"), FormatError);
  write_kge1_bytes(dir / "short.bin", 3, 2, {1, 2, 3});
  EXPECT_THROW(read_embedding_file(dir / "short.bin"), FormatError);
  write_kge1_bytes(dir / "long.bin", 1, 2, {1, 2}, 3);
  EXPECT_THROW(read_embedding_file(dir / "long.bin"), FormatError);
  write_kge1_bytes(dir / "nan.bin", 1, 2, {1, std::nanf("")});
  EXPECT_THROW(read_embedding_file(dir / "nan.bin"), FormatError);
  {
    std::ofstream out(dir / "magic.bin", std::ios::binary);
    out << "KGE2\1\0\0\0\1\0\0\0xxxx";
  }
  EXPECT_THROW(read_embedding_file(dir / "magic.bin"), FormatError);
}

TEST(EmbeddingFile, SidecarPathReplacesExtension) {
  EXPECT_EQ(default_phrase_sidecar("/a/b/emb.bin"), std::filesystem::path("/a/b/emb.txt"));
}

TEST(LoadEmbeddings, PermutesRowsIntoGraphOrder) {
  const auto dir = scratch_dir("kge-permute");
  const auto g = random_kg(4, 1, 4, 2);
  // File order is the reverse of graph order; row i holds the value 10 * id.
  std::vector<std::string> names;
  std::vector<float> vals;
  for (int id = 3; id >= 0; --id) {
    names.push_back(g.phrase(static_cast<NodeId>(id)));
    vals.push_back(10.0f * static_cast<float>(id));
    vals.push_back(1.0f);
  }
  write_kge1_bytes(dir / "e.bin", 4, 2, vals);
  write_phrase_file(dir / "e.txt", names);
  const auto t = load_embeddings(dir / "e.bin", dir / "e.txt", g);
  for (NodeId n = 0; n < 4; ++n) EXPECT_EQ(t.row(n)[0], 10.0f * static_cast<float>(n));
}

TEST(LoadEmbeddings, SurplusAndMissingPhrasesAreNamed) {
  const auto dir = scratch_dir("kge-mismatch");
  const auto g = random_kg(3, 1, 2, 2);
  write_kge1_bytes(dir / "e.bin", 4, 1, {0, 1, 2, 3});
  write_phrase_file(dir / "e.txt", std::vector<std::string>{g.phrase(0), g.phrase(1),
                                                            g.phrase(2), "stranger"});
  try {
    load_embeddings(dir / "e.bin", dir / "e.txt", g);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("stranger"), std::string::npos);
  }
  write_kge1_bytes(dir / "m.bin", 2, 1, {0, 1});
  write_phrase_file(dir / "m.txt", std::vector<std::string>{g.phrase(0), g.phrase(1)});
  try {
    load_embeddings(dir / "m.bin", dir / "m.txt", g);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(g.phrase(2)), std::string::npos);
  }
  write_phrase_file(dir / "n.txt", std::vector<std::string>{g.phrase(0)});
  EXPECT_THROW(load_embeddings(dir / "m.bin", dir / "n.txt", g), FormatError);
}

TEST(PairwiseSimilarity, BlockedEqualsBruteForceExactly) {
  for (std::size_t rows : {50u, 100u}) {
    auto t = gaussian_table(rows, 16, rows);
    std::fill(t.values.begin() + 3 * 16, t.values.begin() + 4 * 16, 0.0f);  // zero row
    const auto unit = normalize_rows(t);
    const double tau = 0.2;
    std::vector<SimPair> brute;
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = i + 1; j < rows; ++j) {
        if (!unit.valid[i] || !unit.valid[j]) continue;
        double s = 0;
        for (std::size_t d = 0; d < 16; ++d) s += unit.values[i * 16 + d] * unit.values[j * 16 + d];
        if (s >= tau)
          brute.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), s});
      }
    ASSERT_FALSE(brute.empty());
    for (std::size_t block : {1u, 7u, 64u, 256u}) {
      const auto got = pairwise_topk_by_threshold(t, tau, block);
      EXPECT_EQ(got.pairs, brute) << "rows " << rows << " block " << block;
      EXPECT_EQ(got.zero_norm_rows, 1u);
    }
  }
}

TEST(PairwiseSimilarity, SimilaritiesAgreeWithFloatInputCosine) {
  const auto t = gaussian_table(30, 8, 4);
  const auto got = pairwise_topk_by_threshold(t, -1.0);
  ASSERT_EQ(got.pairs.size(), 30u * 29 / 2);
  for (const auto& p : got.pairs)
    EXPECT_NEAR(p.similarity, brute_cosine(t, p.first, p.second), 1e-12);
}

TEST(CapThreshold, WorkedExampleFromCounts) {
  kernels::GridCounts counts{};
  for (std::size_t k = 0; k <= 97; ++k) counts[k] = 1000;
  counts[98] = 120;
  counts[99] = 80;
  counts[100] = 5;
  const auto c = choose_cap_threshold(counts, 100);
  EXPECT_DOUBLE_EQ(c.tau, 0.99);
  EXPECT_EQ(c.pairs, 80u);
  EXPECT_FALSE(c.cap_exceeded);
}

TEST(CapThreshold, TableMatchesBruteForceSelection) {
  // Row 0 at angle 0; pairs with row 0 get controlled cosines, the others
  // are spread out so they stay below 0.98.
  std::vector<double> angles{0.0};
  for (int i = 0; i < 6; ++i) angles.push_back(std::acos(0.995) * (i % 2 ? -1 : 1) * (1 + i / 100.0));
  auto t = planar(angles);
  const auto sims = brute_all_pairs(t);
  for (std::uint64_t cap : {1u, 3u, 5u, 10u, 30u}) {
    // Oracle: walk the grid upward and stop at the first value meeting the cap.
    double tau = 1.0;
    bool found = false;
    for (int k = 0; k <= 100 && !found; ++k) {
      std::uint64_t n = 0;
      for (double s : sims) n += s >= k / 100.0;
      if (n <= cap) {
        tau = k / 100.0;
        found = true;
      }
    }
    const auto c = select_threshold_cap(t, cap, 3);
    EXPECT_DOUBLE_EQ(c.tau, tau) << "cap " << cap;
    EXPECT_EQ(c.cap_exceeded, !found);
  }
}

TEST(CapThreshold, LargerCapNeverRaisesTau) {
  const auto t = gaussian_table(60, 4, 5);
  double last = 2.0;
  for (std::uint64_t cap : {1u, 2u, 5u, 20u, 100u, 500u, 1770u, 5000u}) {
    const auto c = select_threshold_cap(t, cap);
    EXPECT_LE(c.tau, last);
    EXPECT_LE(c.pairs, cap);
    last = c.tau;
  }
  EXPECT_DOUBLE_EQ(last, 0.0);
  EXPECT_THROW(select_threshold_cap(t, 0), ConfigError);
}

TEST(CapThreshold, ExceededCapReturnsOne) {
  const auto t = planar({0.0, 0.0, 0.0});
  const auto c = select_threshold_cap(t, 1);
  EXPECT_TRUE(c.cap_exceeded);
  EXPECT_DOUBLE_EQ(c.tau, 1.0);
  EXPECT_EQ(c.pairs, 3u);
}

TEST(TailThreshold, NormalSampleGivesMeanPlusKSigma) {
  Rng rng = make_rng(17);
  std::normal_distribution<double> dist(0.5, 0.1);
  std::vector<double> sims(200000);
  for (auto& s : sims) s = dist(rng);
  const auto c = tail_threshold(sims, 4.0);
  EXPECT_NEAR(c.tau, 0.9, 0.005);
  double mean = 0;
  for (double s : sims) mean += s;
  mean /= static_cast<double>(sims.size());
  EXPECT_NEAR(c.mean, mean, 1e-12);
}

TEST(TailThreshold, DegenerateSampleRejected) {
  const std::vector<double> same(10, 0.3);
  EXPECT_THROW(tail_threshold(same, 3.0), ConfigError);
  EXPECT_THROW(tail_threshold(std::vector<double>{0.1}, 3.0), ConfigError);
}

TEST(TailThreshold, ExhaustiveWhenFewPairs) {
  const auto t = gaussian_table(20, 6, 8);
  const auto sims = brute_all_pairs(t);
  const auto c = select_threshold_tail(t, 1000, 1, 2.0);
  EXPECT_EQ(c.samples, sims.size());
  const auto ref = tail_threshold(sims, 2.0);
  EXPECT_NEAR(c.tau, ref.tau, 1e-12);
  const auto sampled = select_threshold_tail(t, 50, 1, 2.0);
  EXPECT_EQ(sampled.samples, 50u);
  EXPECT_EQ(select_threshold_tail(t, 50, 1, 2.0).tau, sampled.tau);
}

TEST(Densify, AddsEncoderEdgesOnly) {
  const auto g = random_kg(10, 2, 20, 3);
  SimEdgeSet s;
  s.pairs = {{0, 1, 0.99}, {2, 5, 0.97}, {1, 0, 0.99}};
  const auto d = densify(g, s);
  EXPECT_EQ(d.decoder_edges(), g.decoder_edges());
  EXPECT_EQ(d.edges(Split::Train), g.edges(Split::Train));
  EXPECT_EQ(d.sim_pairs().size(), 2u);
  EXPECT_EQ(d.encoder_edges().size(), g.encoder_edges().size() + 4);
  // Inverse closure still refers to base edges only.
  EXPECT_EQ(d.directed_train_edges().size(), 2 * d.edges(Split::Train).size());
}

TEST(SimPairFile, RoundTrip) {
  const auto dir = scratch_dir("sim-file");
  const auto g = random_kg(12, 1, 10, 4);
  SimEdgeSet s;
  s.pairs = {{0, 3, 0.951234}, {2, 7, 0.98}, {5, 6, 1.0}};
  write_sim_pairs(dir / "sim.tsv", g, s);
  const auto back = read_sim_pairs(dir / "sim.tsv", g);
  EXPECT_EQ(back.pairs, s.pairs);
  {
    std::ofstream out(dir / "bad.tsv");
    out << g.phrase(0) << '\t' << g.phrase(1) << "\t0.5\n" << "nobody\t" << g.phrase(1) << "\t0.5\n";
  }
  try {
    read_sim_pairs(dir / "bad.tsv", g);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.tsv:2"), std::string::npos);
  }
}
