#include "linevox/voxelizer.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "linevox/parallel.hpp"

namespace linevox {

namespace {

// Cell of the open piece that leaves `p` along `d`.
Int3 depart_cell(const Vec3& p, const Vec3& d, const GridSpec& spec) {
    Int3 c;
    for (int a = 0; a < 3; ++a) {
        const double v = d[a] < 0.0 ? std::ceil(p[a]) - 1.0 : std::floor(p[a]);
        c[a] = std::clamp(int(v), 0, spec.dims[a] - 1);
    }
    return c;
}

// Cell of the open piece that arrives at `q` along `d`.
Int3 arrive_cell(const Vec3& q, const Vec3& d, const GridSpec& spec) {
    Int3 c;
    for (int a = 0; a < 3; ++a) {
        const double v = d[a] > 0.0 ? std::ceil(q[a]) - 1.0 : std::floor(q[a]);
        c[a] = std::clamp(int(v), 0, spec.dims[a] - 1);
    }
    return c;
}

struct Crossing {
    Vec3 point;
    float attr;
    Int3 cell_after;
};

// Crossings closer than this (in segment parameter) are merged into one edge/corner crossing.
constexpr double kMergeEps = 1e-12;

}  // namespace

std::vector<ClippedPiece> clip_curve_to_voxels(const Curve& curve, const GridSpec& spec) {
    std::vector<Crossing> crossings;
    Int3 current{};
    bool started = false;
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const Vec3 p = curve.points[i];
        const Vec3 q = curve.points[i + 1];
        const Vec3 d = q - p;
        if (d == Vec3{}) continue;
        const float ap = curve.attrs[i], aq = curve.attrs[i + 1];

        Int3 cell = depart_cell(p, d, spec);
        if (!started) {
            current = cell;
            started = true;
        } else if (!(cell == current)) {
            crossings.push_back({p, ap, cell});
        }
        const Int3 target = arrive_cell(q, d, spec);

        for (;;) {
            double t_min = std::numeric_limits<double>::infinity();
            double t_axis[3];
            for (int a = 0; a < 3; ++a) {
                t_axis[a] = std::numeric_limits<double>::infinity();
                if (cell[a] == target[a]) continue;
                const double plane = d[a] > 0.0 ? cell[a] + 1.0 : double(cell[a]);
                t_axis[a] = (plane - p[a]) / d[a];
                t_min = std::min(t_min, t_axis[a]);
            }
            if (!std::isfinite(t_min)) break;
            Vec3 x = p + d * t_min;
            for (int a = 0; a < 3; ++a) {
                if (t_axis[a] > t_min + kMergeEps) continue;
                x[a] = d[a] > 0.0 ? cell[a] + 1.0 : double(cell[a]);
                cell[a] += d[a] > 0.0 ? 1 : -1;
            }
            const float attr = float(ap + (aq - ap) * std::clamp(t_min, 0.0, 1.0));
            crossings.push_back({x, attr, cell});
        }
        current = cell;
    }

    std::vector<ClippedPiece> pieces;
    if (crossings.size() < 2) return pieces;
    pieces.reserve(crossings.size() - 1);
    for (std::size_t j = 0; j + 1 < crossings.size(); ++j) {
        pieces.push_back({crossings[j].cell_after, crossings[j].point, crossings[j + 1].point, crossings[j].attr,
                          crossings[j + 1].attr});
    }
    return pieces;
}

QuantizedSegment quantize_piece(const ClippedPiece& piece, int bins) {
    const Vec3 base = to_vec(piece.cell);
    const Vec3 lin = piece.entry - base;
    const Vec3 lout = piece.exit - base;
    const int fin = owning_face(lin, 1e-9);
    const int fout = owning_face(lout, 1e-9);
    if (fin < 0 || fout < 0) throw std::logic_error("clipped piece endpoint is not on a face of its voxel");
    QuantizedSegment s;
    s.face_in = std::uint8_t(fin);
    s.face_out = std::uint8_t(fout);
    s.bin_in = quantize_point_on_face(lin, fin, bins).bin;
    s.bin_out = quantize_point_on_face(lout, fout, bins).bin;
    s.attr_index = attr_to_index(0.5f * (piece.attr_in + piece.attr_out));
    return s;
}

namespace {

struct PendingSegment {
    std::uint32_t voxel;
    QuantizedSegment seg;
    SegmentOrigin origin;
};

std::vector<PendingSegment> clip_and_quantize(const Curve& curve, std::uint32_t curve_index, const GridSpec& spec) {
    const auto pieces = clip_curve_to_voxels(curve, spec);
    std::vector<PendingSegment> out;
    out.reserve(pieces.size());
    for (std::size_t j = 0; j < pieces.size(); ++j) {
        PendingSegment ps;
        ps.voxel = spec.linear_index(pieces[j].cell);
        ps.seg = quantize_piece(pieces[j], spec.bins);
        ps.seg.chain_start = j == 0;
        ps.origin = {curve_index, std::uint32_t(j)};
        out.push_back(ps);
    }
    return out;
}

void check_budget(const GridSpec& spec, std::size_t segments, const BuildOptions& options) {
    if (options.memory_budget == 0) return;
    const std::size_t bytes =
        std::size_t(kHeaderBytes) * spec.voxel_count() + std::size_t(record_width(spec.log2_bins())) * segments;
    if (bytes > options.memory_budget)
        throw BudgetError("voxel model needs " + std::to_string(bytes) + " bytes, budget is " +
                          std::to_string(options.memory_budget));
}

// Writes the sorted, capped segment stream into the model. `sorted` must be grouped by voxel id
// in ascending order with the stable in-voxel order preserved.
template <typename Range>
void emit_sorted(VoxelModel& model, const Range& sorted, std::size_t count) {
    const int w = model.record_width();
    const int lb = model.spec.log2_bins();
    std::vector<std::uint8_t> fill(model.voxel_count(), 0);
    std::size_t out = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const PendingSegment& ps = sorted(i);
        std::uint8_t& k = fill[ps.voxel];
        if (k == kMaxSegmentsPerVoxel) continue;
        QuantizedSegment s = ps.seg;
        s.local_line_id = std::uint8_t(k % 32);
        pack_segment(s, lb, {model.records.data() + out * std::size_t(w), std::size_t(w)});
        model.origins[out] = ps.origin;
        ++k;
        ++out;
    }
}

void finalize_counts(VoxelModel& model, const std::vector<std::uint32_t>& raw, BuildReport* report) {
    const std::size_t n = model.voxel_count();
    model.counts.resize(n);
    model.offsets.resize(n);
    std::size_t kept = 0;
    BuildReport r;
    for (std::size_t v = 0; v < n; ++v) {
        const std::uint32_t c = raw[v];
        const std::uint32_t capped = std::min<std::uint32_t>(c, kMaxSegmentsPerVoxel);
        model.counts[v] = std::uint8_t(capped);
        model.offsets[v] = std::uint32_t(kept);  // exclusive prefix sum
        kept += capped;
        if (c > capped) {
            r.overflow_dropped += c - capped;
            ++r.overflow_voxels;
        }
        if (c > 32) ++r.id_collision_voxels;
    }
    model.records.assign(kept * std::size_t(model.record_width()), 0);
    model.origins.assign(kept, {});
    if (report) {
        report->overflow_dropped = r.overflow_dropped;
        report->overflow_voxels = r.overflow_voxels;
        report->id_collision_voxels = r.id_collision_voxels;
    }
}

VoxelModel empty_model(const GridSpec& spec, const BuildOptions& options) {
    spec.validate();
    VoxelModel model;
    model.spec = spec;
    model.transfer = options.transfer;
    return model;
}

}  // namespace

VoxelModel build_voxel_model(const CurveSet& normalized, const GridSpec& spec, const BuildOptions& options,
                             BuildReport* report) {
    VoxelModel model = empty_model(spec, options);
    const auto n_curves = std::int64_t(normalized.curves.size());
    const int workers = resolve_threads(options.threads);
    std::vector<std::vector<PendingSegment>> per_curve(normalized.curves.size());

#pragma omp parallel for schedule(dynamic, 16) num_threads(workers)
    for (std::int64_t i = 0; i < n_curves; ++i)
        per_curve[std::size_t(i)] = clip_and_quantize(normalized.curves[std::size_t(i)], std::uint32_t(i), spec);

    // Flatten in curve order so the stable grouping below is reproducible for any worker count.
    std::vector<std::size_t> curve_start(per_curve.size() + 1, 0);
    for (std::size_t i = 0; i < per_curve.size(); ++i) curve_start[i + 1] = curve_start[i] + per_curve[i].size();
    const std::size_t total = curve_start.back();
    std::vector<PendingSegment> flat(total);
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::int64_t i = 0; i < n_curves; ++i)
        std::copy(per_curve[std::size_t(i)].begin(), per_curve[std::size_t(i)].end(),
                  flat.begin() + std::ptrdiff_t(curve_start[std::size_t(i)]));
    per_curve.clear();

    std::vector<std::uint32_t> raw(model.voxel_count(), 0);
    for (const auto& ps : flat) ++raw[ps.voxel];
    std::size_t capped_total = 0;
    for (auto c : raw) capped_total += std::min<std::uint32_t>(c, kMaxSegmentsPerVoxel);
    check_budget(spec, capped_total, options);

    // Counting sort: uncapped exclusive prefix sum gives each voxel's bucket in `grouped`.
    std::vector<std::size_t> bucket(model.voxel_count());
    std::exclusive_scan(raw.begin(), raw.end(), bucket.begin(), std::size_t(0));
    std::vector<std::uint32_t> grouped(total);
    for (std::size_t i = 0; i < total; ++i) grouped[bucket[flat[i].voxel]++] = std::uint32_t(i);

    finalize_counts(model, raw, report);
    if (report) report->pieces = total;
    emit_sorted(model, [&](std::size_t i) -> const PendingSegment& { return flat[grouped[i]]; }, total);
    return model;
}

VoxelModel build_voxel_model_reference(const CurveSet& normalized, const GridSpec& spec, const BuildOptions& options,
                                       BuildReport* report) {
    VoxelModel model = empty_model(spec, options);
    std::vector<PendingSegment> buffer;
    for (std::size_t i = 0; i < normalized.curves.size(); ++i) {
        auto segs = clip_and_quantize(normalized.curves[i], std::uint32_t(i), spec);
        buffer.insert(buffer.end(), segs.begin(), segs.end());
    }
    std::stable_sort(buffer.begin(), buffer.end(),
                     [](const PendingSegment& a, const PendingSegment& b) { return a.voxel < b.voxel; });
    std::vector<std::uint32_t> raw(model.voxel_count(), 0);
    for (const auto& ps : buffer) ++raw[ps.voxel];
    std::size_t capped_total = 0;
    for (auto c : raw) capped_total += std::min<std::uint32_t>(c, kMaxSegmentsPerVoxel);
    check_budget(spec, capped_total, options);
    finalize_counts(model, raw, report);
    if (report) report->pieces = buffer.size();
    emit_sorted(model, [&](std::size_t i) -> const PendingSegment& { return buffer[i]; }, buffer.size());
    return model;
}

double count_duplicates(const VoxelModel& model) {
    const std::size_t total = model.segment_count();
    if (total == 0) return 0.0;
    const int lb = model.spec.log2_bins();
    const int bb = 3 + 2 * lb;
    std::size_t dupes = 0;
    std::unordered_set<std::uint64_t> seen;
    for (std::size_t v = 0; v < model.voxel_count(); ++v) {
        const std::size_t n = model.counts[v];
        if (n < 2) continue;
        seen.clear();
        for (std::size_t k = 0; k < n; ++k) {
            const auto s = model.segment(model.offsets[v] + k);
            std::uint64_t a = (std::uint64_t(s.face_in) << (2 * lb)) | s.bin_in;
            std::uint64_t b = (std::uint64_t(s.face_out) << (2 * lb)) | s.bin_out;
            if (a > b) std::swap(a, b);
            if (!seen.insert((a << bb) | b).second) ++dupes;
        }
    }
    return double(dupes) / double(total);
}

}  // namespace linevox
