#include "linevox/segment.hpp"

#include <bit>
#include <string>

namespace linevox {

namespace {

// Records are at most 7 bytes, so a single 64-bit word holds the whole bit stream.
std::uint64_t load_word(std::span<const std::uint8_t> in, int width) {
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t(in[std::size_t(i)]) << (8 * i);
    return v;
}

void check_field(bool ok, const char* name) {
    if (!ok) throw PackError(std::string("segment field out of range: ") + name);
}

}  // namespace

void pack_segment(const QuantizedSegment& s, int log2_bins, std::span<std::uint8_t> out) {
    if (out.size() < std::size_t(record_width(log2_bins))) throw PackError("record buffer too small");
    const std::uint64_t bin_limit = std::uint64_t(1) << (2 * log2_bins);
    check_field(s.face_in < 6, "face_in");
    check_field(s.face_out < 6, "face_out");
    check_field(s.bin_in < bin_limit, "bin_in");
    check_field(s.bin_out < bin_limit, "bin_out");
    check_field(s.local_line_id < 32, "local_line_id");

    const int bb = 2 * log2_bins;
    std::uint64_t word = 0;
    int shift = 0;
    const auto put = [&](std::uint64_t value, int bits) {
        word |= value << shift;
        shift += bits;
    };
    put(s.face_in, 3);
    put(s.bin_in, bb);
    put(s.face_out, 3);
    put(s.bin_out, bb);
    put(s.attr_index, 8);
    put(s.local_line_id, 5);
    put(s.chain_start ? 1 : 0, 1);
    const int width = record_width(log2_bins);
    for (int i = 0; i < width; ++i) out[std::size_t(i)] = std::uint8_t(word >> (8 * i));
}

QuantizedSegment unpack_segment(std::span<const std::uint8_t> record, int log2_bins) {
    if (record.size() < std::size_t(record_width(log2_bins))) throw PackError("record too short");
    const int bb = 2 * log2_bins;
    std::uint64_t word = load_word(record, record_width(log2_bins));
    const auto get = [&word](int bits) {
        const std::uint64_t v = word & ((std::uint64_t(1) << bits) - 1);
        word >>= bits;
        return v;
    };
    QuantizedSegment s;
    s.face_in = std::uint8_t(get(3));
    s.bin_in = std::uint32_t(get(bb));
    s.face_out = std::uint8_t(get(3));
    s.bin_out = std::uint32_t(get(bb));
    s.attr_index = std::uint8_t(get(8));
    s.local_line_id = std::uint8_t(get(5));
    s.chain_start = get(1) != 0;
    if (s.face_in >= 6 || s.face_out >= 6) throw PackError("corrupt record: face id >= 6");
    return s;
}

FaceBin quantize_point_on_face(const Vec3& local, int face, int bins, double tolerance) {
    if (face < 0 || face >= 6) throw std::invalid_argument("face id must be in [0,5]");
    const int axis = face_axis(face);
    const double plane = face_is_upper(face) ? 1.0 : 0.0;
    if (std::abs(local[axis] - plane) > tolerance)
        throw std::invalid_argument("point is not on face " + std::to_string(face));
    const auto [ua, va] = in_face_axes(axis);
    const auto to_bin = [bins](double c) {
        return std::clamp(int(std::floor(c * bins)), 0, bins - 1);
    };
    const int bu = to_bin(local[ua]);
    const int bv = to_bin(local[va]);
    FaceBin fb;
    fb.bin = std::uint32_t(bu + bins * bv);
    fb.reconstructed = bin_center(face, fb.bin, bins);
    return fb;
}

Vec3 bin_center(int face, std::uint32_t bin, int bins) {
    const int axis = face_axis(face);
    const auto [ua, va] = in_face_axes(axis);
    Vec3 p;
    p[axis] = face_is_upper(face) ? 1.0 : 0.0;
    p[ua] = (double(bin % std::uint32_t(bins)) + 0.5) / bins;
    p[va] = (double(bin / std::uint32_t(bins)) + 0.5) / bins;
    return p;
}

unsigned faces_containing(const Vec3& local, double tolerance) {
    unsigned mask = 0;
    for (int a = 0; a < 3; ++a) {
        if (std::abs(local[a]) <= tolerance) mask |= 1u << make_face(a, false);
        if (std::abs(local[a] - 1.0) <= tolerance) mask |= 1u << make_face(a, true);
    }
    return mask;
}

int owning_face(const Vec3& local, double tolerance) {
    const unsigned mask = faces_containing(local, tolerance);
    return mask ? std::countr_zero(mask) : -1;
}

}  // namespace linevox
