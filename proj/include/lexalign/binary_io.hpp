#pragma once

// The "LXRW1" container family.
//
//   magic   5 bytes  "LXRW1"
//   kind    u8       see ContainerKind
//   rows    u32 LE
//   cols    u32 LE
//   payload kind-specific, all integers little-endian, floats IEEE f32
//
// embedding: u8 normalized flag, rows*cols f32 (row-major), then `rows`
//            words, each u32 byte length followed by UTF-8 bytes.
// map:       u8 degenerate flag, rows*cols f32.
// adapter:   u64 step count, then three rows*cols f32 blocks: weights,
//            first moments, second moments.

#include <cstdint>
#include <filesystem>

#include "lexalign/align.hpp"
#include "lexalign/contrast.hpp"
#include "lexalign/embed_store.hpp"

namespace lexalign {

enum class ContainerKind : std::uint8_t {
  embedding = 0,
  map_orthonormal = 1,
  map_general = 2,
  adapter = 3,
};

inline constexpr char kContainerMagic[5] = {'L', 'X', 'R', 'W', '1'};

/// True when the file starts with the container magic.
bool is_container(const std::filesystem::path& path);

void write_embedding_cache(const EmbeddingSpace& space,
                           const std::filesystem::path& path);
EmbeddingSpace read_embedding_cache(const std::filesystem::path& path);

void write_linear_map(const LinearMap& map, const std::filesystem::path& path);
LinearMap read_linear_map(const std::filesystem::path& path);

void write_adapter(const AdapterState& state,
                   const std::filesystem::path& path);
AdapterState read_adapter(const std::filesystem::path& path);

}  // namespace lexalign
