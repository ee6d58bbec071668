#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "linevox/render.hpp"

namespace linevox {

/// `.vxl` layout (little-endian):
///   "VXL1", u32 rx, ry, rz, u8 log2N, u8 record_width, u64 segment_count,
///   rx*ry*rz voxel headers (u8 count, u32 first record), segment records,
///   transfer table (256 x RGBA f32),
///   then optional chunks: 4-byte tag, u64 payload length, payload.
/// Chunks: "DENS" density octree, "REPL" representative lines, "AOFD" per-voxel AO.
/// Unknown chunks are skipped on load. Curve provenance is not stored.
std::vector<std::uint8_t> encode_vxl(const Scene& scene);
Scene decode_vxl(const std::vector<std::uint8_t>& bytes);

void save_vxl(const Scene& scene, const std::filesystem::path& path);
Scene load_vxl(const std::filesystem::path& path);

}  // namespace linevox
