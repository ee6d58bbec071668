#pragma once

#include <cstddef>
#include <vector>

#include "linevox/curves.hpp"
#include "linevox/image.hpp"
#include "linevox/voxelizer.hpp"

namespace linevox {

/// A polyline's pieces as straight segments (not necessarily connected).
struct SegmentChain {
    std::vector<std::pair<Vec3, Vec3>> segments;
};

/// Grid-space reconstruction of every curve from the stored segments, in chain order.
/// Requires the model's provenance (origins); throws std::invalid_argument otherwise.
std::vector<SegmentChain> reconstruct_curves(const VoxelModel& model, std::size_t curve_count);

SegmentChain chain_of(const Curve& curve);

/// Nearest-segment queries over one chain: uniform hash of segment bounding boxes with an exact
/// expanding-shell search.
class SegmentIndex {
public:
    explicit SegmentIndex(const SegmentChain& chain, double cell = 1.0);
    /// Index of the nearest segment and its distance; ties keep the lower index. Chain must be non-empty.
    std::pair<std::size_t, double> nearest(const Vec3& p) const;

private:
    const SegmentChain& chain_;
    double cell_;
    Int3 lo_, dims_;
    std::vector<std::uint32_t> start_, items_;
};

/// Points along a chain, at most `spacing` apart along each segment (endpoints included).
std::vector<Vec3> sample_chain(const SegmentChain& chain, double spacing);

struct HausdorffReport {
    double mean = 0.0;        // mean over curves of the symmetric mean closest-point distance
    double max = 0.0;         // largest closest-point distance seen in either direction
    std::size_t curves = 0;   // curves measured
    std::size_t skipped = 0;  // curves without any emitted segment
};

/// Symmetric mean closest-point distance of two chains (samples at `spacing`), plus the max.
std::pair<double, double> chain_distance(const SegmentChain& a, const SegmentChain& b, double spacing = 0.1);

/// `original` must be the grid-normalized curve set the model was built from. Voxel units.
HausdorffReport mean_hausdorff(const CurveSet& original, const VoxelModel& model, double spacing = 0.1,
                               int threads = 0);

struct TangentReport {
    double mean_deg = 0.0;
    std::size_t samples = 0;
    std::size_t skipped = 0;
};

/// Angle between each original sample's tangent and the direction of the nearest reconstructed
/// (non-degenerate) segment of the same curve, averaged over samples.
double chain_tangent_deviation(const SegmentChain& original, const SegmentChain& reconstructed, double spacing,
                               std::size_t* samples = nullptr);
TangentReport mean_tangent_deviation(const CurveSet& original, const VoxelModel& model, double spacing = 0.1,
                                     int threads = 0);

struct MemoryReport {
    std::size_t header_bytes = 0, segment_bytes = 0, total = 0;
    int bytes_per_segment = 0;
    std::size_t voxels = 0, segments = 0;
};

MemoryReport memory_report(const VoxelModel& model);

struct ImageComparison {
    int max_diff = 0;           // largest per-channel difference, 0..255
    double within_2 = 0.0;      // fraction of pixels whose channels all differ by <= 2
    double psnr = 0.0;          // RGB, dB; infinity for identical images
};

/// Throws std::invalid_argument when sizes differ.
ImageComparison image_compare(const Image& a, const Image& b);

}  // namespace linevox
