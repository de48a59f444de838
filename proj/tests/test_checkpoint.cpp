#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "gtest/gtest.h"
#include "kgc/error.hpp"
#include "kgc/numerics/checkpoint.hpp"
#include "kgc/numerics/ops.hpp"
#include "toy.hpp"

using namespace kgc;

namespace {

ParameterSet sample_params() {
  ParameterSet p;
  p.add("a/w", Tensor::parameter({2, 3}, {0.5, -1.25, 3.0, 1e-3, 7.0, -0.0}), true);
  p.add("b", Tensor::parameter({4}, {1, 2, 3, 4}, false), false);
  return p;
}

std::vector<unsigned char> bytes_of(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

template <class T>
T read_at(const std::vector<unsigned char>& b, std::size_t offset) {
  T v{};
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(b[offset + i]) << (8 * i);
  return v;
}

}  // namespace

TEST(Checkpoint, RoundTripRestoresValuesAtSinglePrecision) {
  const auto dir = kgc::testing::scratch_dir("ckpt-roundtrip");
  auto saved = sample_params();
  save_checkpoint(dir / "m.kgc", saved);
  auto loaded = sample_params();
  for (auto& p : loaded.items()) {
    auto v = p.tensor.mutable_values();
    std::fill(v.begin(), v.end(), 0.0);
  }
  load_checkpoint(dir / "m.kgc", loaded);
  for (std::size_t i = 0; i < saved.size(); ++i) {
    const auto a = saved.items()[i].tensor.values(), b = loaded.items()[i].tensor.values();
    for (std::size_t k = 0; k < a.size(); ++k)
      EXPECT_EQ(b[k], static_cast<double>(static_cast<float>(a[k])));
  }
}

TEST(Checkpoint, LayoutIsLittleEndianWithNamedEntries) {
  const auto dir = kgc::testing::scratch_dir("ckpt-layout");
  ParameterSet p;
  p.add("x", Tensor::parameter({2}, {1.5, -2.0}), false);
  save_checkpoint(dir / "x.kgc", p);
  const auto b = bytes_of(dir / "x.kgc");
  ASSERT_EQ(b.size(), 4u + 4 + 4 + 4 + 1 + 4 + 8 + 2 * 4);
  EXPECT_EQ(std::memcmp(b.data(), "KGC1", 4), 0);
  EXPECT_EQ(read_at<std::uint32_t>(b, 4), 1u);
  EXPECT_EQ(read_at<std::uint32_t>(b, 8), 1u);
  EXPECT_EQ(read_at<std::uint32_t>(b, 12), 1u);
  EXPECT_EQ(b[16], 'x');
  EXPECT_EQ(read_at<std::uint32_t>(b, 17), 1u);
  EXPECT_EQ(read_at<std::uint64_t>(b, 21), 2u);
  EXPECT_EQ(std::bit_cast<float>(read_at<std::uint32_t>(b, 29)), 1.5f);
  EXPECT_EQ(std::bit_cast<float>(read_at<std::uint32_t>(b, 33)), -2.0f);
}

TEST(Checkpoint, OptimizerStateSurvives) {
  const auto dir = kgc::testing::scratch_dir("ckpt-optim");
  auto params = sample_params();
  Adam adam({0.01});
  sum(mul(params.get("a/w"), params.get("a/w"))).backward();
  adam.step(params);
  save_checkpoint(dir / "m.kgc", params, &adam);

  auto fresh = sample_params();
  Adam restored({0.01});
  load_checkpoint(dir / "m.kgc", fresh, &restored);
  EXPECT_EQ(restored.steps(), 1);
  ASSERT_TRUE(restored.state().contains("a/w"));
  const auto& m = restored.state().at("a/w").m;
  const auto& m0 = adam.state().at("a/w").m;
  for (std::size_t i = 0; i < m.size(); ++i)
    EXPECT_EQ(m[i], static_cast<double>(static_cast<float>(m0[i])));
}

TEST(Checkpoint, RejectsBadMagicAndMismatchedShapes) {
  const auto dir = kgc::testing::scratch_dir("ckpt-bad");
  {
    std::ofstream out(dir / "bad.kgc", std::ios::binary);
    out << "NOPE and more bytes";
  }
  auto params = sample_params();
  EXPECT_THROW(load_checkpoint(dir / "bad.kgc", params), FormatError);

  save_checkpoint(dir / "m.kgc", params);
  ParameterSet other;
  other.add("a/w", Tensor::parameter({3, 2}, std::vector<double>(6)), true);
  other.add("b", Tensor::parameter({4}, std::vector<double>(4)), false);
  EXPECT_THROW(load_checkpoint(dir / "m.kgc", other), Error);
  ParameterSet missing;
  missing.add("zzz", Tensor::parameter({1}, {0}), false);
  EXPECT_THROW(load_checkpoint(dir / "m.kgc", missing), Error);
}
