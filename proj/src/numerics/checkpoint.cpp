#include "kgc/numerics/checkpoint.hpp"

#include <fstream>

#include "kgc/error.hpp"
#include "kgc/io/binary.hpp"

namespace kgc {

namespace {
constexpr const char* kMomentPrefix = "optim/adam/m/";
constexpr const char* kVariancePrefix = "optim/adam/v/";
constexpr const char* kStepKey = "optim/adam/step";
}  // namespace

void write_archive(const std::filesystem::path& path, const TensorArchive& archive) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  io::write_magic(out, kCheckpointMagic);
  io::write_le<std::uint32_t>(out, kCheckpointVersion);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(archive.size()));
  for (const auto& [name, entry] : archive) {
    if (entry.payload.size() != numel(entry.shape))
      throw ShapeError("archive entry '" + name + "': payload does not match " +
                       to_string(entry.shape));
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(entry.shape.size()));
    for (auto e : entry.shape) io::write_le<std::uint64_t>(out, e);
    for (float f : entry.payload) io::write_f32(out, f);
  }
  if (!out) throw Error("write failed: " + path.string());
}

TensorArchive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  const std::string file = path.string();
  io::expect_magic(in, kCheckpointMagic, file);
  const auto version = io::read_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion)
    throw FormatError(file + ": unsupported checkpoint version " + std::to_string(version));
  const auto count = io::read_le<std::uint32_t>(in, "entry count");
  TensorArchive archive;
  for (std::uint32_t e = 0; e < count; ++e) {
    const auto len = io::read_le<std::uint32_t>(in, "name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw FormatError(file + ": truncated entry name");
    const auto rank = io::read_le<std::uint32_t>(in, "rank");
    ArchiveEntry entry;
    for (std::uint32_t r = 0; r < rank; ++r)
      entry.shape.push_back(static_cast<std::size_t>(io::read_le<std::uint64_t>(in, "extent")));
    entry.payload.resize(numel(entry.shape));
    for (auto& f : entry.payload) f = io::read_f32(in, "payload");
    archive.emplace(std::move(name), std::move(entry));
  }
  return archive;
}

namespace {

ArchiveEntry to_entry(const Shape& shape, std::span<const double> values) {
  ArchiveEntry e{shape, {}};
  e.payload.reserve(values.size());
  for (double v : values) e.payload.push_back(static_cast<float>(v));
  return e;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params,
                     const Adam* optimizer) {
  TensorArchive archive;
  for (const auto& p : params.items()) {
    archive[p.name] = to_entry(p.tensor.shape(), p.tensor.values());
    if (optimizer) {
      const auto it = optimizer->state().find(p.name);
      if (it != optimizer->state().end()) {
        archive[kMomentPrefix + p.name] = to_entry(p.tensor.shape(), it->second.m);
        archive[kVariancePrefix + p.name] = to_entry(p.tensor.shape(), it->second.v);
      }
    }
  }
  if (optimizer)
    archive[kStepKey] = ArchiveEntry{{1}, {static_cast<float>(optimizer->steps())}};
  write_archive(path, archive);
}

void load_checkpoint(const std::filesystem::path& path, ParameterSet& params, Adam* optimizer) {
  const auto archive = read_archive(path);
  auto fetch = [&](const std::string& name, const Shape& shape) -> const ArchiveEntry& {
    const auto it = archive.find(name);
    if (it == archive.end()) throw FormatError(path.string() + ": missing entry '" + name + "'");
    if (it->second.shape != shape)
      throw ShapeError(path.string() + ": entry '" + name + "' has shape " +
                       to_string(it->second.shape) + ", model expects " + to_string(shape));
    return it->second;
  };
  for (auto& p : params.items()) {
    const auto& e = fetch(p.name, p.tensor.shape());
    auto dst = p.tensor.mutable_values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = e.payload[i];
  }
  if (!optimizer || !archive.contains(kStepKey)) return;
  optimizer->set_steps(static_cast<std::int64_t>(archive.at(kStepKey).payload.at(0)));
  for (auto& p : params.items()) {
    if (!archive.contains(kMomentPrefix + p.name)) continue;
    const auto& m = fetch(kMomentPrefix + p.name, p.tensor.shape());
    const auto& v = fetch(kVariancePrefix + p.name, p.tensor.shape());
    auto& slot = optimizer->state()[p.name];
    slot.m.assign(m.payload.begin(), m.payload.end());
    slot.v.assign(v.payload.begin(), v.payload.end());
  }
}

}  // namespace kgc
