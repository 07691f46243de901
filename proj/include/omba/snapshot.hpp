#pragma once

#include <iosfwd>
#include <string>

#include "omba/core.hpp"

namespace omba::snapshot {

/// Versioned magic header of the embedding snapshot container.
inline constexpr std::string_view kMagic = "OMBA-EMB-v1\n";

/// Binary layout after the magic: dimension, unit count, step count, then
/// per-unit (kind, initialized flag, id), then raw vectors and accumulators
/// in dense order. Little-endian doubles; byte-identical for identical
/// stores.
void save(std::ostream& out, const EmbeddingStore& store);
void save_file(const std::string& path, const EmbeddingStore& store);

/// Throws on a bad magic, truncation, or trailing bytes.
EmbeddingStore load(std::istream& in);
EmbeddingStore load_file(const std::string& path);

}  // namespace omba::snapshot
