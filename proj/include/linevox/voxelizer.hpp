#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "linevox/curves.hpp"
#include "linevox/segment.hpp"
#include "linevox/transfer.hpp"

namespace linevox {

/// One per-voxel piece of a clipped curve, before quantization.
struct ClippedPiece {
    Int3 cell;
    Vec3 entry, exit;  // grid coordinates, both on faces of `cell`
    float attr_in = 0.0f, attr_out = 0.0f;
};

/// Clips a grid-normalized curve at voxel faces. The pieces before the first and after the last
/// face crossing are omitted; a curve that never leaves its voxel yields nothing.
std::vector<ClippedPiece> clip_curve_to_voxels(const Curve& curve, const GridSpec& spec);

/// Quantizes a clipped piece. local_line_id is left 0; the model builder assigns it.
QuantizedSegment quantize_piece(const ClippedPiece& piece, int bins);

struct SegmentOrigin {
    std::uint32_t curve = 0;
    std::uint32_t piece = 0;  // position in the curve's clipped chain
};

class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Headers (5 bytes/voxel) plus a flat array of bit-packed segment records grouped by voxel.
struct VoxelModel {
    GridSpec spec;
    std::vector<std::uint8_t> counts;    // per voxel, <= 255
    std::vector<std::uint32_t> offsets;  // per voxel, index of the first record
    std::vector<std::uint8_t> records;   // segment_count * record_width bytes
    TransferTable transfer = TransferTable::preset("coolwarm");
    /// Source curve of every stored segment; empty for models loaded from disk.
    std::vector<SegmentOrigin> origins;

    int record_width() const { return linevox::record_width(spec.log2_bins()); }
    std::size_t voxel_count() const { return spec.voxel_count(); }
    std::size_t segment_count() const { return records.size() / std::size_t(record_width()); }
    std::size_t memory_bytes() const {
        return std::size_t(kHeaderBytes) * voxel_count() + std::size_t(record_width()) * segment_count();
    }

    std::span<const std::uint8_t> record(std::size_t i) const {
        const auto w = std::size_t(record_width());
        return {records.data() + i * w, w};
    }
    QuantizedSegment segment(std::size_t i) const { return unpack_segment(record(i), spec.log2_bins()); }

    /// Grid-space endpoints of a stored segment of voxel `cell`.
    std::pair<Vec3, Vec3> endpoints(const Int3& cell, const QuantizedSegment& s) const {
        const Vec3 base = to_vec(cell);
        return {base + bin_center(s.face_in, s.bin_in, spec.bins),
                base + bin_center(s.face_out, s.bin_out, spec.bins)};
    }

    bool operator==(const VoxelModel& o) const {
        return spec.dims == o.spec.dims && spec.bins == o.spec.bins && counts == o.counts &&
               offsets == o.offsets && records == o.records && transfer == o.transfer;
    }
};

struct BuildOptions {
    int threads = 0;                    // 0 = OpenMP default
    std::size_t memory_budget = 0;      // bytes; 0 = unlimited
    TransferTable transfer = TransferTable::preset("coolwarm");
};

struct BuildReport {
    std::size_t pieces = 0;               // clipped pieces before the per-voxel cap
    std::size_t overflow_dropped = 0;     // pieces beyond 255 in a voxel
    std::size_t overflow_voxels = 0;
    std::size_t id_collision_voxels = 0;  // voxels with > 32 segments (local ids wrap)
};

/// Parallel build: clip per curve, then a counting sort by voxel id with an exclusive prefix sum.
VoxelModel build_voxel_model(const CurveSet& normalized, const GridSpec& spec, const BuildOptions& options = {},
                             BuildReport* report = nullptr);

/// Serial reference build: append buffer, std::stable_sort by voxel id, then prefix sum.
VoxelModel build_voxel_model_reference(const CurveSet& normalized, const GridSpec& spec,
                                       const BuildOptions& options = {}, BuildReport* report = nullptr);

/// Fraction of segments whose voxel and (unordered) endpoint codes repeat an earlier segment.
double count_duplicates(const VoxelModel& model);

}  // namespace linevox
