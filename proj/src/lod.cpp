#include "linevox/lod.hpp"

#include <algorithm>
#include <limits>

#include "linevox/parallel.hpp"

namespace linevox {

float ScalarField::sample(const Vec3& p) const {
    const Vec3 q = p - Vec3{0.5, 0.5, 0.5};
    int i0[3], i1[3];
    double f[3];
    for (int a = 0; a < 3; ++a) {
        const double fl = std::floor(q[a]);
        f[a] = q[a] - fl;
        const int base = int(fl);
        i0[a] = std::clamp(base, 0, dims[a] - 1);
        i1[a] = std::clamp(base + 1, 0, dims[a] - 1);
    }
    const auto v = [&](int x, int y, int z) { return double(at(x, y, z)); };
    const double c00 = v(i0[0], i0[1], i0[2]) * (1 - f[0]) + v(i1[0], i0[1], i0[2]) * f[0];
    const double c10 = v(i0[0], i1[1], i0[2]) * (1 - f[0]) + v(i1[0], i1[1], i0[2]) * f[0];
    const double c01 = v(i0[0], i0[1], i1[2]) * (1 - f[0]) + v(i1[0], i0[1], i1[2]) * f[0];
    const double c11 = v(i0[0], i1[1], i1[2]) * (1 - f[0]) + v(i1[0], i1[1], i1[2]) * f[0];
    const double c0 = c00 * (1 - f[1]) + c10 * f[1];
    const double c1 = c01 * (1 - f[1]) + c11 * f[1];
    return float(c0 * (1 - f[2]) + c1 * f[2]);
}

float DensityOctree::sample(const Vec3& p, int l) const {
    const double scale = 1.0 / double(1 << l);
    return levels[std::size_t(l)].sample(p * scale);
}

float DensityOctree::sample_lod(const Vec3& p, double level) const {
    const double lmax = double(level_count() - 1);
    const double l = std::clamp(level, 0.0, lmax);
    const int l0 = int(std::floor(l));
    const double f = l - l0;
    const float a = sample(p, l0);
    if (f <= 0.0 || l0 + 1 > int(lmax)) return a;
    const float b = sample(p, l0 + 1);
    return float(a * (1.0 - f) + b * f);
}

ScalarField compute_density_level0(const VoxelModel& model, int threads) {
    ScalarField field(model.spec.dims);
    const auto n = std::int64_t(model.voxel_count());
#pragma omp parallel for schedule(dynamic, 4096) num_threads(resolve_threads(threads))
    for (std::int64_t v = 0; v < n; ++v) {
        const std::size_t count = model.counts[std::size_t(v)];
        if (count == 0) continue;
        const Int3 cell = model.spec.cell_of(std::uint32_t(v));
        double rho = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            const auto s = model.segment(model.offsets[std::size_t(v)] + k);
            const auto [a, b] = model.endpoints(cell, s);
            rho += distance(a, b) * double(model.transfer[s.attr_index].a);
        }
        field.values[std::size_t(v)] = float(rho);
    }
    return field;
}

namespace {

ScalarField downsample(const ScalarField& fine, int threads) {
    const Int3 cd{(fine.dims.x + 1) / 2, (fine.dims.y + 1) / 2, (fine.dims.z + 1) / 2};
    ScalarField coarse(cd);
#pragma omp parallel for schedule(static) num_threads(resolve_threads(threads))
    for (int z = 0; z < cd.z; ++z)
        for (int y = 0; y < cd.y; ++y)
            for (int x = 0; x < cd.x; ++x) {
                double sum = 0.0;
                int n = 0;
                for (int dz = 0; dz < 2; ++dz)
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            const int fx = 2 * x + dx, fy = 2 * y + dy, fz = 2 * z + dz;
                            if (fx >= fine.dims.x || fy >= fine.dims.y || fz >= fine.dims.z) continue;
                            sum += double(fine.at(fx, fy, fz));
                            ++n;
                        }
                coarse.at(x, y, z) = float(sum / n);
            }
    return coarse;
}

bool is_root(const Int3& d) { return d.x == 1 && d.y == 1 && d.z == 1; }

}  // namespace

DensityOctree build_octree(ScalarField level0, int threads) {
    if (level0.empty()) throw std::invalid_argument("density field is empty");
    DensityOctree tree;
    tree.levels.push_back(std::move(level0));
    while (!is_root(tree.levels.back().dims)) tree.levels.push_back(downsample(tree.levels.back(), threads));
    return tree;
}

SnappedPoint snap_to_boundary(const Vec3& local, int bins) {
    SnappedPoint best;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int face = 0; face < 6; ++face) {
        Vec3 on = local;
        for (int a = 0; a < 3; ++a) on[a] = std::clamp(on[a], 0.0, 1.0);
        on[face_axis(face)] = face_is_upper(face) ? 1.0 : 0.0;
        const FaceBin fb = quantize_point_on_face(on, face, bins);
        const double d2 = length_sq(fb.reconstructed - local);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = {face, fb.bin, fb.reconstructed};
        }
    }
    return best;
}

namespace {

// Extends a -> b in both directions to where the line leaves the unit voxel.
std::pair<Vec3, Vec3> extend_to_boundary(const Vec3& a, const Vec3& b) {
    const Vec3 d = b - a;
    if (length_sq(d) < 1e-18) return {a, b};
    double t0 = -std::numeric_limits<double>::infinity(), t1 = std::numeric_limits<double>::infinity();
    int ax0 = -1, ax1 = -1;
    for (int axis = 0; axis < 3; ++axis) {
        if (std::abs(d[axis]) < 1e-12) continue;
        double lo = -a[axis] / d[axis], hi = (1.0 - a[axis]) / d[axis];
        if (lo > hi) std::swap(lo, hi);
        if (lo > t0) t0 = lo, ax0 = axis;
        if (hi < t1) t1 = hi, ax1 = axis;
    }
    Vec3 p = a + d * t0, q = a + d * t1;
    for (int axis = 0; axis < 3; ++axis) {
        p[axis] = std::clamp(p[axis], 0.0, 1.0);
        q[axis] = std::clamp(q[axis], 0.0, 1.0);
    }
    p[ax0] = d[ax0] > 0.0 ? 0.0 : 1.0;
    q[ax1] = d[ax1] > 0.0 ? 1.0 : 0.0;
    return {p, q};
}

}  // namespace

std::optional<RepLine> representative_line(std::span<const LocalSegment> segments, int bins) {
    if (segments.empty()) return std::nullopt;
    Vec3 sum_start, sum_end;
    for (const auto& seg : segments) {
        Vec3 s = seg.start, e = seg.end;
        // angle > 90 degrees with the running average direction -> flip; exactly 90 keeps the order
        if (dot(e - s, sum_end - sum_start) < 0.0) std::swap(s, e);
        sum_start += s;
        sum_end += e;
    }
    const double n = double(segments.size());
    const auto [start, end] = extend_to_boundary(sum_start / n, sum_end / n);
    const SnappedPoint a = snap_to_boundary(start, bins);
    const SnappedPoint b = snap_to_boundary(end, bins);
    RepLine line;
    line.face_in = std::uint8_t(a.face);
    line.bin_in = a.bin;
    line.face_out = std::uint8_t(b.face);
    line.bin_out = b.bin;
    line.present = true;
    return line;
}

std::pair<Vec3, Vec3> RepLineLevel::endpoints(const Int3& cell, const RepLine& line, int bins) const {
    const double scale = double(1 << level);
    const Vec3 base = to_vec(cell);
    return {(base + bin_center(line.face_in, line.bin_in, bins)) * scale,
            (base + bin_center(line.face_out, line.bin_out, bins)) * scale};
}

namespace {

std::size_t lin(const Int3& d, int x, int y, int z) {
    return std::size_t(x) + std::size_t(d.x) * (std::size_t(y) + std::size_t(d.y) * std::size_t(z));
}

// Connects representatives of face-adjacent voxels that both end on their shared face by moving
// both endpoints to the bin containing their average.
void snap_adjacent(RepLineLevel& lvl, int bins) {
    const Int3 d = lvl.dims;
    for (int z = 0; z < d.z; ++z)
        for (int y = 0; y < d.y; ++y)
            for (int x = 0; x < d.x; ++x) {
                RepLine& a = lvl.lines[lin(d, x, y, z)];
                if (!a.present) continue;
                for (int axis = 0; axis < 3; ++axis) {
                    Int3 nb{x, y, z};
                    nb[axis] += 1;
                    if (nb[axis] >= d[axis]) continue;
                    RepLine& b = lvl.lines[lin(d, nb.x, nb.y, nb.z)];
                    if (!b.present) continue;
                    const auto up = std::uint8_t(make_face(axis, true));
                    const auto down = std::uint8_t(make_face(axis, false));
                    std::uint32_t* ea = a.face_in == up ? &a.bin_in : (a.face_out == up ? &a.bin_out : nullptr);
                    std::uint32_t* eb = b.face_in == down ? &b.bin_in : (b.face_out == down ? &b.bin_out : nullptr);
                    if (!ea || !eb) continue;
                    const Vec3 pa = bin_center(up, *ea, bins);
                    const Vec3 pb = bin_center(down, *eb, bins);
                    Vec3 mid = (pa + pb) * 0.5;
                    mid[axis] = 1.0;
                    const std::uint32_t bin = quantize_point_on_face(mid, up, bins).bin;
                    *ea = bin;
                    *eb = bin;
                }
            }
}

}  // namespace

RepLineField build_rep_lines(const VoxelModel& model, const DensityOctree& octree, int threads) {
    RepLineField field;
    field.bins = model.spec.bins;
    const int bins = model.spec.bins;
    const int workers = resolve_threads(threads);

    for (int lod = 1; lod < octree.level_count(); ++lod) {
        RepLineLevel lvl;
        lvl.level = lod;
        lvl.dims = octree.level(lod).dims;
        lvl.lines.assign(std::size_t(lvl.dims.x) * lvl.dims.y * lvl.dims.z, RepLine{});
        const RepLineLevel* finer = lod >= 2 ? &field.levels[std::size_t(lod - 2)] : nullptr;
        const Int3 fd = finer ? finer->dims : model.spec.dims;
        const Int3 cd = lvl.dims;

#pragma omp parallel for schedule(dynamic, 64) num_threads(workers)
        for (std::int64_t idx = 0; idx < std::int64_t(lvl.lines.size()); ++idx) {
            const Int3 p{int(idx % cd.x), int((idx / cd.x) % cd.y), int(idx / (std::int64_t(cd.x) * cd.y))};
            std::vector<LocalSegment> members;
            double weight = 0.0;
            const Vec3 base = to_vec(p);
            for (int dz = 0; dz < 2; ++dz)
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        const Int3 c{2 * p.x + dx, 2 * p.y + dy, 2 * p.z + dz};
                        if (c.x >= fd.x || c.y >= fd.y || c.z >= fd.z) continue;
                        if (!finer) {
                            const std::uint32_t v = model.spec.linear_index(c);
                            for (std::size_t k = 0; k < model.counts[v]; ++k) {
                                const auto s = model.segment(model.offsets[v] + k);
                                const auto [a, b] = model.endpoints(c, s);
                                members.push_back({a * 0.5 - base, b * 0.5 - base});
                                weight += distance(a, b);
                            }
                        } else {
                            const RepLine& r = finer->at(c);
                            if (!r.present) continue;
                            const auto [a, b] = finer->endpoints(c, r, bins);
                            const double to_local = 1.0 / double(1 << lod);
                            members.push_back({a * to_local - base, b * to_local - base});
                            weight += r.weight;
                        }
                    }
            if (auto rep = representative_line(members, bins)) {
                rep->weight = float(weight);
                lvl.lines[std::size_t(idx)] = *rep;
            }
        }
        snap_adjacent(lvl, bins);
        field.levels.push_back(std::move(lvl));
    }
    return field;
}

}  // namespace linevox
