#include "linevox/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "linevox/parallel.hpp"

namespace linevox {

namespace {

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double len2 = length_sq(ab);
    const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    return distance(p, a + ab * t);
}

}  // namespace

std::vector<SegmentChain> reconstruct_curves(const VoxelModel& model, std::size_t curve_count) {
    if (model.origins.size() != model.segment_count())
        throw std::invalid_argument("model has no curve provenance (rebuild it from the curves)");
    struct Entry {
        std::uint32_t piece;
        Vec3 a, b;
    };
    std::vector<std::vector<Entry>> per_curve(curve_count);
    for (std::size_t v = 0; v < model.voxel_count(); ++v) {
        const Int3 cell = model.spec.cell_of(std::uint32_t(v));
        for (std::uint32_t k = 0; k < model.counts[v]; ++k) {
            const std::size_t i = model.offsets[v] + k;
            const SegmentOrigin& o = model.origins[i];
            if (o.curve >= curve_count) throw std::invalid_argument("segment provenance outside the curve set");
            const auto [a, b] = model.endpoints(cell, model.segment(i));
            per_curve[o.curve].push_back({o.piece, a, b});
        }
    }
    std::vector<SegmentChain> chains(curve_count);
    for (std::size_t c = 0; c < curve_count; ++c) {
        auto& entries = per_curve[c];
        std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) { return x.piece < y.piece; });
        for (const auto& e : entries) chains[c].segments.emplace_back(e.a, e.b);
    }
    return chains;
}

SegmentChain chain_of(const Curve& curve) {
    SegmentChain chain;
    for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) chain.segments.emplace_back(curve.points[i], curve.points[i + 1]);
    return chain;
}

SegmentIndex::SegmentIndex(const SegmentChain& chain, double cell) : chain_(chain), cell_(cell) {
    if (chain.segments.empty()) throw std::invalid_argument("cannot index an empty chain");
    Box3 box;
    for (const auto& [a, b] : chain.segments) {
        box.expand(a);
        box.expand(b);
    }
    Int3 hi;
    for (int k = 0; k < 3; ++k) {
        lo_[k] = int(std::floor(box.lo[k] / cell_));
        hi[k] = int(std::floor(box.hi[k] / cell_));
        dims_[k] = hi[k] - lo_[k] + 1;
    }
    const auto cells_of = [&](const std::pair<Vec3, Vec3>& s, auto&& fn) {
        Int3 c0, c1;
        for (int k = 0; k < 3; ++k) {
            c0[k] = int(std::floor(std::min(s.first[k], s.second[k]) / cell_)) - lo_[k];
            c1[k] = int(std::floor(std::max(s.first[k], s.second[k]) / cell_)) - lo_[k];
        }
        for (int z = c0.z; z <= c1.z; ++z)
            for (int y = c0.y; y <= c1.y; ++y)
                for (int x = c0.x; x <= c1.x; ++x)
                    fn(std::size_t(x) + std::size_t(dims_.x) * (std::size_t(y) + std::size_t(dims_.y) * std::size_t(z)));
    };
    start_.assign(std::size_t(dims_.x) * dims_.y * dims_.z + 1, 0);
    for (const auto& s : chain.segments) cells_of(s, [&](std::size_t c) { ++start_[c + 1]; });
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    items_.resize(start_.back());
    std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < chain.segments.size(); ++i)
        cells_of(chain.segments[i], [&](std::size_t c) { items_[fill[c]++] = std::uint32_t(i); });
}

std::pair<std::size_t, double> SegmentIndex::nearest(const Vec3& p) const {
    Int3 q;
    int kmax = 0;
    for (int k = 0; k < 3; ++k) {
        q[k] = int(std::floor(p[k] / cell_)) - lo_[k];
        kmax = std::max({kmax, std::abs(q[k]), std::abs(q[k] - (dims_[k] - 1))});
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    const auto visit = [&](int x, int y, int z) {
        if (x < 0 || y < 0 || z < 0 || x >= dims_.x || y >= dims_.y || z >= dims_.z) return;
        const std::size_t c = std::size_t(x) + std::size_t(dims_.x) * (std::size_t(y) + std::size_t(dims_.y) * std::size_t(z));
        for (std::uint32_t j = start_[c]; j < start_[c + 1]; ++j) {
            const std::uint32_t i = items_[j];
            const auto& [a, b] = chain_.segments[i];
            const double d = point_segment_distance(p, a, b);
            if (d < best_d || (d == best_d && i < best)) best_d = d, best = i;
        }
    };
    for (int k = 0; k <= kmax; ++k) {
        // Chebyshev shell at distance k around q
        for (int dz = -k; dz <= k; ++dz)
            for (int dy = -k; dy <= k; ++dy) {
                const bool face = std::abs(dz) == k || std::abs(dy) == k;
                for (int dx = -k; dx <= k; dx += face ? 1 : 2 * std::max(k, 1)) visit(q.x + dx, q.y + dy, q.z + dz);
            }
        // every cell not yet visited is at least k cells away from p's cell
        if (best_d <= k * cell_) break;
    }
    return {best, best_d};
}

std::vector<Vec3> sample_chain(const SegmentChain& chain, double spacing) {
    std::vector<Vec3> out;
    for (const auto& [a, b] : chain.segments) {
        const int n = std::max(1, int(std::ceil(distance(a, b) / spacing)));
        for (int i = 0; i <= n; ++i) out.push_back(lerp(a, b, double(i) / n));
    }
    return out;
}

std::pair<double, double> chain_distance(const SegmentChain& a, const SegmentChain& b, double spacing) {
    const SegmentIndex ia(a), ib(b);
    double max_d = 0.0;
    const auto directed = [&](const SegmentChain& from, const SegmentIndex& to) {
        const auto samples = sample_chain(from, spacing);
        double sum = 0.0;
        for (const Vec3& p : samples) {
            const double d = to.nearest(p).second;
            sum += d;
            max_d = std::max(max_d, d);
        }
        return sum / double(samples.size());
    };
    const double ab = directed(a, ib);
    const double ba = directed(b, ia);
    return {0.5 * (ab + ba), max_d};
}

HausdorffReport mean_hausdorff(const CurveSet& original, const VoxelModel& model, double spacing, int threads) {
    const auto rec = reconstruct_curves(model, original.curves.size());
    const auto n = std::int64_t(original.curves.size());
    std::vector<std::pair<double, double>> per(original.curves.size(), {-1.0, 0.0});
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(threads))
    for (std::int64_t c = 0; c < n; ++c) {
        if (rec[std::size_t(c)].segments.empty()) continue;
        per[std::size_t(c)] = chain_distance(chain_of(original.curves[std::size_t(c)]), rec[std::size_t(c)], spacing);
    }
    HausdorffReport r;
    double sum = 0.0;
    for (const auto& [mean, max] : per) {
        if (mean < 0.0) {
            ++r.skipped;
            continue;
        }
        sum += mean;
        r.max = std::max(r.max, max);
        ++r.curves;
    }
    r.mean = r.curves ? sum / double(r.curves) : 0.0;
    return r;
}

double chain_tangent_deviation(const SegmentChain& original, const SegmentChain& reconstructed, double spacing,
                               std::size_t* samples) {
    SegmentChain usable;
    for (const auto& s : reconstructed.segments)
        if (length_sq(s.second - s.first) > 1e-24) usable.segments.push_back(s);
    if (usable.segments.empty()) throw std::invalid_argument("no non-degenerate reconstructed segment");
    const SegmentIndex index(usable);
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& [a, b] : original.segments) {
        const double len = distance(a, b);
        if (len <= 0.0) continue;
        const Vec3 t = (b - a) * (1.0 / len);
        const int n = std::max(1, int(std::ceil(len / spacing)));
        for (int i = 0; i <= n; ++i) {
            const auto& [ra, rb] = usable.segments[index.nearest(lerp(a, b, double(i) / n)).first];
            const double c = std::clamp(dot(t, normalize(rb - ra)), -1.0, 1.0);
            sum += std::acos(c) * 180.0 / std::numbers::pi;
            ++count;
        }
    }
    if (samples) *samples = count;
    return count ? sum / double(count) : 0.0;
}

TangentReport mean_tangent_deviation(const CurveSet& original, const VoxelModel& model, double spacing,
                                     int threads) {
    const auto rec = reconstruct_curves(model, original.curves.size());
    const auto n = std::int64_t(original.curves.size());
    std::vector<std::pair<double, std::size_t>> per(original.curves.size(), {0.0, 0});
    std::vector<char> measured(original.curves.size(), 0);
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(threads))
    for (std::int64_t c = 0; c < n; ++c) {
        const auto& r = rec[std::size_t(c)];
        const bool any = std::any_of(r.segments.begin(), r.segments.end(),
                                     [](const auto& s) { return length_sq(s.second - s.first) > 1e-24; });
        if (!any) continue;
        std::size_t count = 0;
        const double mean = chain_tangent_deviation(chain_of(original.curves[std::size_t(c)]), r, spacing, &count);
        per[std::size_t(c)] = {mean * double(count), count};
        measured[std::size_t(c)] = 1;
    }
    TangentReport report;
    double sum = 0.0;
    for (std::size_t c = 0; c < per.size(); ++c) {
        if (!measured[c]) {
            ++report.skipped;
            continue;
        }
        sum += per[c].first;
        report.samples += per[c].second;
    }
    report.mean_deg = report.samples ? sum / double(report.samples) : 0.0;
    return report;
}

MemoryReport memory_report(const VoxelModel& model) {
    MemoryReport r;
    r.voxels = model.voxel_count();
    r.segments = model.segment_count();
    r.bytes_per_segment = model.record_width();
    r.header_bytes = std::size_t(kHeaderBytes) * r.voxels;
    r.segment_bytes = std::size_t(r.bytes_per_segment) * r.segments;
    r.total = r.header_bytes + r.segment_bytes;
    return r;
}

ImageComparison image_compare(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height) throw std::invalid_argument("image sizes differ");
    ImageComparison c;
    const std::size_t pixels = std::size_t(a.width) * std::size_t(a.height);
    std::size_t within = 0;
    double sq = 0.0;
    for (std::size_t i = 0; i < pixels; ++i) {
        int m = 0;
        for (int k = 0; k < 4; ++k) {
            const int d = std::abs(int(a.rgba[i * 4 + k]) - int(b.rgba[i * 4 + k]));
            m = std::max(m, d);
            if (k < 3) sq += double(d) * d;
        }
        c.max_diff = std::max(c.max_diff, m);
        within += m <= 2;
    }
    c.within_2 = pixels ? double(within) / double(pixels) : 1.0;
    const double mse = pixels ? sq / (3.0 * double(pixels)) : 0.0;
    c.psnr = mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(255.0 * 255.0 / mse);
    return c;
}

}  // namespace linevox
