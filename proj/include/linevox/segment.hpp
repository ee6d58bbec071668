#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

#include "linevox/vec.hpp"

namespace linevox {

// Face IDs: 0 = -x, 1 = +x, 2 = -y, 3 = +y, 4 = -z, 5 = +z.
constexpr int face_axis(int face) { return face >> 1; }
constexpr bool face_is_upper(int face) { return (face & 1) != 0; }
constexpr int make_face(int axis, bool upper) { return axis * 2 + (upper ? 1 : 0); }

/// The two in-face axes of `axis`, in increasing order.
constexpr std::pair<int, int> in_face_axes(int axis) {
    return axis == 0 ? std::pair{1, 2} : (axis == 1 ? std::pair{0, 2} : std::pair{0, 1});
}

struct QuantizedSegment {
    std::uint8_t face_in = 0;
    std::uint8_t face_out = 0;
    std::uint32_t bin_in = 0;   // u + N*v
    std::uint32_t bin_out = 0;
    std::uint8_t attr_index = 0;
    std::uint8_t local_line_id = 0;  // 5 bits
    bool chain_start = false;        // first piece of a curve chain; owns an entry joint sphere

    bool operator==(const QuantizedSegment&) const = default;
};

struct FaceBin {
    std::uint32_t bin = 0;
    Vec3 reconstructed;  // voxel-local bin center
};

/// Bits needed for one record: two (face, bin) endpoints, attribute byte, local id, chain flag.
constexpr int segment_payload_bits(int log2_bins) { return 2 * (3 + 2 * log2_bins) + 8 + 5 + 1; }

/// Minimal whole number of bytes holding the record for N = 2^log2_bins.
constexpr int record_width(int log2_bins) { return (segment_payload_bits(log2_bins) + 7) / 8; }

/// Bytes per voxel header: 1-byte segment count + 4-byte offset.
constexpr int kHeaderBytes = 5;

constexpr int kMaxSegmentsPerVoxel = 255;

class PackError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Writes exactly record_width(log2_bins) bytes into `out` (little-endian bit stream).
void pack_segment(const QuantizedSegment& s, int log2_bins, std::span<std::uint8_t> out);
QuantizedSegment unpack_segment(std::span<const std::uint8_t> record, int log2_bins);

/// Voxel-local point on the named face -> bin index and bin center.
/// Throws std::invalid_argument when the point is farther than `tolerance` from the face plane.
FaceBin quantize_point_on_face(const Vec3& local, int face, int bins, double tolerance = 1e-6);

/// Voxel-local bin center for (face, bin).
Vec3 bin_center(int face, std::uint32_t bin, int bins);

/// Faces of the unit voxel that `local` lies on (bit i set for face i), within `tolerance`.
unsigned faces_containing(const Vec3& local, double tolerance);

/// Smallest face ID among the faces containing `local`; -1 if none.
int owning_face(const Vec3& local, double tolerance = 1e-9);

}  // namespace linevox
