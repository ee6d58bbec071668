#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "linevox/vec.hpp"

namespace linevox {

/// Raised for malformed input files. Carries the 1-based line number for text formats (0 if n/a).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Raised for binary files with bad magic, truncated payloads or inconsistent sizes.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Curve {
    std::vector<Vec3> points;
    std::vector<float> attrs;  // one per point, in [0,1]

    std::size_t size() const { return points.size(); }
};

struct CurveSet {
    std::vector<Curve> curves;
    Box3 bbox;

    std::size_t vertex_count() const;
    void recompute_bbox();
};

/// Macro grid resolution plus per-face bin count.
struct GridSpec {
    Int3 dims{1, 1, 1};
    int bins = 32;

    std::size_t voxel_count() const { return std::size_t(dims.x) * dims.y * dims.z; }
    int log2_bins() const;
    bool contains(const Int3& c) const {
        return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < dims.x && c.y < dims.y && c.z < dims.z;
    }
    std::uint32_t linear_index(const Int3& c) const {
        return std::uint32_t(c.x + dims.x * (c.y + std::size_t(dims.y) * c.z));
    }
    Int3 cell_of(std::uint32_t index) const {
        const int x = int(index % std::uint32_t(dims.x));
        const std::uint32_t rest = index / std::uint32_t(dims.x);
        return {x, int(rest % std::uint32_t(dims.y)), int(rest / std::uint32_t(dims.y))};
    }

    /// Validates dims > 0 and bins a power of two in [2, 256]; throws std::invalid_argument.
    void validate() const;

    /// Largest axis gets `max_resolution` voxels, the others keep the bbox aspect ratio (rounded up).
    static GridSpec fit(const Box3& bbox, int max_resolution, int bins);
};

struct LoadReport {
    std::size_t dropped_degenerate_segments = 0;
    std::size_t dropped_short_curves = 0;
};

CurveSet load_obj_lines(const std::filesystem::path& path, LoadReport* report = nullptr);
CurveSet parse_obj_lines(const std::string& text, LoadReport* report = nullptr);

CurveSet load_lines_binary(const std::filesystem::path& path);
void save_lines_binary(const CurveSet& set, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_lines_binary(const CurveSet& set);
CurveSet decode_lines_binary(const std::vector<std::uint8_t>& bytes);

/// Loads by extension: `.obj` or `.lines`.
CurveSet load_curves(const std::filesystem::path& path, LoadReport* report = nullptr);

/// Analytic bound every generated vertex is guaranteed to stay inside.
Box3 tornado_bounds();

/// Streamlines of a swirling updraft (Rankine-like vortex with weak inflow), fixed-step Euler.
CurveSet generate_tornado(int n_curves, int steps, std::uint64_t seed);

/// Uniformly scales the set into [0,dims] and centers the residual slack on each axis.
CurveSet normalize_to_grid(const CurveSet& set, const GridSpec& spec);

}  // namespace linevox
