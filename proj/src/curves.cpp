#include "linevox/curves.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "bytes.hpp"

namespace linevox {

std::size_t CurveSet::vertex_count() const {
    std::size_t n = 0;
    for (const auto& c : curves) n += c.size();
    return n;
}

void CurveSet::recompute_bbox() {
    bbox = Box3{};
    for (const auto& c : curves)
        for (const auto& p : c.points) bbox.expand(p);
}

int GridSpec::log2_bins() const { return std::countr_zero(unsigned(bins)); }

void GridSpec::validate() const {
    if (dims.x <= 0 || dims.y <= 0 || dims.z <= 0) throw std::invalid_argument("grid dims must be positive");
    if (bins < 2 || bins > 256 || !std::has_single_bit(unsigned(bins)))
        throw std::invalid_argument("bins must be a power of two in [2,256], got " + std::to_string(bins));
    if (voxel_count() > std::size_t(std::numeric_limits<std::uint32_t>::max()))
        throw std::invalid_argument("grid has more voxels than a 32-bit index can address");
}

GridSpec GridSpec::fit(const Box3& bbox, int max_resolution, int bins) {
    if (max_resolution <= 0) throw std::invalid_argument("grid resolution must be positive");
    const Vec3 ext = bbox.extent();
    const double largest = max_abs_component(ext);
    GridSpec spec;
    spec.bins = bins;
    for (int a = 0; a < 3; ++a) {
        const double rel = largest > 0.0 ? ext[a] / largest : 1.0;
        spec.dims[a] = std::max(1, int(std::ceil(rel * max_resolution - 1e-9)));
    }
    spec.validate();
    return spec;
}

namespace {

// Removes zero-length steps; returns false if fewer than two vertices remain.
bool clean_curve(Curve& c, LoadReport* report) {
    Curve out;
    out.points.reserve(c.points.size());
    out.attrs.reserve(c.attrs.size());
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        if (!out.points.empty() && out.points.back() == c.points[i]) {
            if (report) ++report->dropped_degenerate_segments;
            continue;
        }
        out.points.push_back(c.points[i]);
        out.attrs.push_back(std::clamp(c.attrs[i], 0.0f, 1.0f));
    }
    c = std::move(out);
    if (c.points.size() < 2) {
        if (report) ++report->dropped_short_curves;
        return false;
    }
    return true;
}

void finish(CurveSet& set) {
    if (set.curves.empty()) throw ParseError("no curves");
    set.recompute_bbox();
}

double parse_number(std::string_view tok, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ParseError("malformed number '" + std::string(tok) + "'", line);
    return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

}  // namespace

CurveSet parse_obj_lines(const std::string& text, LoadReport* report) {
    std::vector<Vec3> verts;
    std::vector<float> attrs;
    CurveSet set;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto tokens = split_ws(raw);
        if (tokens.empty()) continue;
        if (tokens[0] == "#") {
            if (tokens.size() >= 2 && tokens[1] == "attr") {
                if (tokens.size() != 3) throw ParseError("'# attr' expects one value", line_no);
                if (verts.empty()) throw ParseError("'# attr' before any vertex", line_no);
                attrs.back() = float(parse_number(tokens[2], line_no));
            }
            continue;
        }
        if (tokens[0].front() == '#') continue;
        if (tokens[0] == "v") {
            if (tokens.size() != 4 && tokens.size() != 5) throw ParseError("'v' expects 3 coordinates", line_no);
            verts.push_back({parse_number(tokens[1], line_no), parse_number(tokens[2], line_no),
                             parse_number(tokens[3], line_no)});
            attrs.push_back(0.0f);
        } else if (tokens[0] == "l") {
            if (tokens.size() < 3) throw ParseError("'l' expects at least two indices", line_no);
            Curve c;
            for (std::size_t k = 1; k < tokens.size(); ++k) {
                // "l 1/2" style vertex/texcoord pairs: only the vertex index matters.
                const auto tok = tokens[k].substr(0, tokens[k].find('/'));
                long idx = 0;
                const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), idx);
                if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
                    throw ParseError("malformed index '" + std::string(tokens[k]) + "'", line_no);
                const long resolved = idx < 0 ? long(verts.size()) + idx + 1 : idx;
                if (resolved < 1 || resolved > long(verts.size()))
                    throw ParseError("vertex index " + std::to_string(idx) + " out of range (have " +
                                         std::to_string(verts.size()) + " vertices)",
                                     line_no);
                c.points.push_back(verts[std::size_t(resolved - 1)]);
                c.attrs.push_back(attrs[std::size_t(resolved - 1)]);
            }
            if (clean_curve(c, report)) set.curves.push_back(std::move(c));
        }
        // other OBJ records (f, vn, o, g, usemtl, ...) carry no line data
    }
    finish(set);
    return set;
}

CurveSet load_obj_lines(const std::filesystem::path& path, LoadReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_obj_lines(ss.str(), report);
}

namespace {

constexpr char kLinesMagic[4] = {'L', 'N', 'S', '1'};

using bytes::put_f32;
using bytes::put_u32;

}  // namespace

std::vector<std::uint8_t> encode_lines_binary(const CurveSet& set) {
    std::vector<std::uint8_t> out(kLinesMagic, kLinesMagic + 4);
    put_u32(out, std::uint32_t(set.curves.size()));
    for (const auto& c : set.curves) {
        put_u32(out, std::uint32_t(c.size()));
        for (std::size_t i = 0; i < c.size(); ++i) {
            put_f32(out, float(c.points[i].x));
            put_f32(out, float(c.points[i].y));
            put_f32(out, float(c.points[i].z));
            put_f32(out, c.attrs[i]);
        }
    }
    return out;
}

CurveSet decode_lines_binary(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kLinesMagic, 4) != 0)
        throw FormatError("bad .lines magic (expected LNS1)");
    bytes::Reader r(bytes, ".lines payload", 4);
    const std::uint32_t count = r.u32();
    CurveSet set;
    set.curves.reserve(std::min<std::size_t>(count, r.remaining() / 4));
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t n = r.u32();
        if (std::size_t(n) * 16 > r.remaining()) throw FormatError("truncated .lines payload");
        Curve c;
        c.points.resize(n);
        c.attrs.resize(n);
        for (std::uint32_t k = 0; k < n; ++k) {
            c.points[k].x = r.f32();
            c.points[k].y = r.f32();
            c.points[k].z = r.f32();
            c.attrs[k] = r.f32();
        }
        if (n < 2) throw FormatError("curve " + std::to_string(i) + " has fewer than two vertices");
        set.curves.push_back(std::move(c));
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes after .lines payload");
    if (set.curves.empty()) throw ParseError("no curves");
    set.recompute_bbox();
    return set;
}

void save_lines_binary(const CurveSet& set, const std::filesystem::path& path) {
    const auto bytes = encode_lines_binary(set);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

CurveSet load_lines_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_lines_binary(bytes);
}

CurveSet load_curves(const std::filesystem::path& path, LoadReport* report) {
    const auto ext = path.extension().string();
    if (ext == ".obj" || ext == ".OBJ") return load_obj_lines(path, report);
    if (ext == ".lines") return load_lines_binary(path);
    throw std::invalid_argument("unsupported curve file extension '" + ext + "' (want .obj or .lines)");
}

namespace {

// Vortex parameters. Integration time is fixed so the curve shape does not depend on `steps`.
constexpr double kOuterRadius = 1.0;
constexpr double kInnerSeedRadius = 0.08;
constexpr double kCoreRadius = 0.25;
constexpr double kCirculation = 2.0;
constexpr double kInflow = 0.4;
constexpr double kUpdraft = 0.9;
constexpr double kCoreBoost = 1.0;
constexpr double kSeedHeight = 0.2;
constexpr double kDuration = 1.0;

double updraft(double r) {
    return kUpdraft * (1.0 + kCoreBoost * std::exp(-(r * r) / (kCoreRadius * kCoreRadius)));
}

double angular_speed(double r) { return kCirculation / (r * r + kCoreRadius * kCoreRadius); }

}  // namespace

Box3 tornado_bounds() {
    // r never grows (pure inflow), z grows at most kUpdraft*(1+kCoreBoost) per unit time.
    Box3 b;
    b.lo = {-kOuterRadius, -kOuterRadius, 0.0};
    b.hi = {kOuterRadius, kOuterRadius, kSeedHeight + kDuration * kUpdraft * (1.0 + kCoreBoost)};
    return b;
}

CurveSet generate_tornado(int n_curves, int steps, std::uint64_t seed) {
    if (n_curves < 1) throw std::invalid_argument("n_curves must be >= 1");
    if (steps < 2) throw std::invalid_argument("steps must be >= 2");

    struct Seed {
        double r, theta, z;
    };
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Seed> seeds(static_cast<std::size_t>(n_curves));
    for (auto& s : seeds) {
        const double r2lo = kInnerSeedRadius * kInnerSeedRadius;
        s.r = std::sqrt(r2lo + unit(rng) * (kOuterRadius * kOuterRadius - r2lo));
        s.theta = unit(rng) * 2.0 * 3.14159265358979323846;
        s.z = unit(rng) * kSeedHeight;
    }

    const double h = kDuration / double(steps - 1);
    const double max_speed = std::hypot(kCirculation / (2.0 * kCoreRadius), kInflow * kOuterRadius,
                                        kUpdraft * (1.0 + kCoreBoost));
    CurveSet set;
    set.curves.resize(seeds.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n_curves; ++i) {
        Curve& c = set.curves[std::size_t(i)];
        c.points.reserve(std::size_t(steps));
        c.attrs.reserve(std::size_t(steps));
        double r = seeds[std::size_t(i)].r, theta = seeds[std::size_t(i)].theta, z = seeds[std::size_t(i)].z;
        for (int k = 0; k < steps; ++k) {
            const double ur = -kInflow * r;
            const double omega = angular_speed(r);
            const double uz = updraft(r);
            c.points.push_back({r * std::cos(theta), r * std::sin(theta), z});
            const double speed = std::sqrt(ur * ur + (omega * r) * (omega * r) + uz * uz);
            c.attrs.push_back(float(std::clamp(speed / max_speed, 0.0, 1.0)));
            // Euler step of the field in cylindrical coordinates
            r += h * ur;
            theta += h * omega;
            z += h * uz;
        }
    }
    set.recompute_bbox();
    return set;
}

CurveSet normalize_to_grid(const CurveSet& set, const GridSpec& spec) {
    if (set.bbox.empty()) throw std::invalid_argument("cannot normalize an empty curve set");
    const Vec3 ext = set.bbox.extent();
    double scale = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a)
        if (ext[a] > 0.0) scale = std::min(scale, double(spec.dims[a]) / ext[a]);
    if (!std::isfinite(scale)) throw std::invalid_argument("curve set has zero extent on all axes");

    Vec3 offset;
    for (int a = 0; a < 3; ++a) offset[a] = 0.5 * (double(spec.dims[a]) - ext[a] * scale);

    CurveSet out;
    out.curves.reserve(set.curves.size());
    for (const auto& c : set.curves) {
        Curve n;
        n.attrs = c.attrs;
        n.points.reserve(c.size());
        for (const auto& p : c.points) {
            Vec3 q;
            for (int a = 0; a < 3; ++a)
                q[a] = std::clamp((p[a] - set.bbox.lo[a]) * scale + offset[a], 0.0, double(spec.dims[a]));
            n.points.push_back(q);
        }
        out.curves.push_back(std::move(n));
    }
    out.recompute_bbox();
    return out;
}

}  // namespace linevox
