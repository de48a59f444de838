#pragma once

// KGC1 checkpoint container.
//
//   "KGC1"  u32 version  u32 entry_count
//   per entry: u32 name_len, name bytes, u32 rank, u64 extents[rank],
//              numel x f32 payload (row-major)
//
// All integers and floats little-endian. Parameters are stored under their
// own names; optimizer state lives under "optim/".

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "kgc/numerics/optim.hpp"
#include "kgc/numerics/params.hpp"

namespace kgc {

inline constexpr char kCheckpointMagic[4] = {'K', 'G', 'C', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ArchiveEntry {
  Shape shape;
  std::vector<float> payload;
};

using TensorArchive = std::map<std::string, ArchiveEntry>;

void write_archive(const std::filesystem::path& path, const TensorArchive& archive);
TensorArchive read_archive(const std::filesystem::path& path);

/// Parameters, plus Adam moments and step count when `optimizer` is given.
void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params,
                     const Adam* optimizer = nullptr);
/// Fills every parameter of `params` (names and shapes must match). Restores
/// the optimizer state when present in the file and `optimizer` is given.
void load_checkpoint(const std::filesystem::path& path, ParameterSet& params,
                     Adam* optimizer = nullptr);

}  // namespace kgc
