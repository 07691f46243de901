#include "omba/snapshot.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace omba::snapshot {

namespace {

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!in) throw std::runtime_error("snapshot: truncated input");
  return value;
}

}  // namespace

void save(std::ostream& out, const EmbeddingStore& store) {
  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(store.dimension()));
  write_pod<std::uint64_t>(out, store.unit_count());
  write_pod<std::uint64_t>(out, store.step_count());
  for (std::uint32_t i = 0; i < store.unit_count(); ++i) {
    const UnitId& unit = store.unit(i);
    write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(unit.kind));
    write_pod<std::uint8_t>(out, store.is_initialized(i) ? 1 : 0);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(unit.id.size()));
    out.write(unit.id.data(), static_cast<std::streamsize>(unit.id.size()));
  }
  for (std::uint32_t i = 0; i < store.unit_count(); ++i) {
    auto v = store.vec(i);
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  for (std::uint32_t i = 0; i < store.unit_count(); ++i) {
    auto a = store.accum(i);
    out.write(reinterpret_cast<const char*>(a.data()),
              static_cast<std::streamsize>(a.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("snapshot: write failure");
}

EmbeddingStore load(std::istream& in) {
  std::string magic(kMagic.size(), '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!in || magic != kMagic)
    throw std::runtime_error("snapshot: bad magic (expected OMBA-EMB-v1)");

  const auto dim = read_pod<std::uint32_t>(in);
  const auto unit_count = read_pod<std::uint64_t>(in);
  const auto step_count = read_pod<std::uint64_t>(in);
  if (dim == 0) throw std::runtime_error("snapshot: zero dimension");

  EmbeddingStore store(static_cast<int>(dim));
  std::vector<std::uint8_t> init_flags;
  init_flags.reserve(unit_count);
  for (std::uint64_t i = 0; i < unit_count; ++i) {
    const auto kind = read_pod<std::uint8_t>(in);
    if (kind > 1) throw std::runtime_error("snapshot: bad unit kind");
    init_flags.push_back(read_pod<std::uint8_t>(in));
    const auto len = read_pod<std::uint32_t>(in);
    std::string id(len, '\0');
    in.read(id.data(), static_cast<std::streamsize>(len));
    if (!in) throw std::runtime_error("snapshot: truncated unit table");
    const std::uint32_t dense = store.intern(static_cast<UnitKind>(kind), id);
    if (dense != i) throw std::runtime_error("snapshot: duplicate unit entry");
  }
  for (std::uint64_t i = 0; i < unit_count; ++i) {
    auto v = store.vec(static_cast<std::uint32_t>(i));
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (init_flags[i]) store.mark_initialized(static_cast<std::uint32_t>(i));
  }
  for (std::uint64_t i = 0; i < unit_count; ++i) {
    auto a = store.accum(static_cast<std::uint32_t>(i));
    in.read(reinterpret_cast<char*>(a.data()),
            static_cast<std::streamsize>(a.size() * sizeof(double)));
  }
  if (!in) throw std::runtime_error("snapshot: truncated payload");
  store.set_step_count(step_count);
  if (in.peek() != std::char_traits<char>::eof())
    throw std::runtime_error("snapshot: trailing bytes");
  return store;
}

void save_file(const std::string& path, const EmbeddingStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("snapshot: cannot open for writing: " + path);
  save(out, store);
}

EmbeddingStore load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("snapshot: cannot open: " + path);
  return load(in);
}

}  // namespace omba::snapshot
