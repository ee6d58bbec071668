#include "linevox/model_io.hpp"

#include <cstring>
#include <fstream>

#include "bytes.hpp"

namespace linevox {

using namespace bytes;

namespace {

constexpr char kMagic[4] = {'V', 'X', 'L', '1'};

void put_dims(std::vector<std::uint8_t>& out, const Int3& d) {
    put_u32(out, std::uint32_t(d.x));
    put_u32(out, std::uint32_t(d.y));
    put_u32(out, std::uint32_t(d.z));
}

Int3 read_dims(Reader& r) {
    Int3 d;
    for (int a = 0; a < 3; ++a) {
        const std::uint32_t v = r.u32();
        if (v == 0 || v > (1u << 16)) throw FormatError("bad grid dimension " + std::to_string(v));
        d[a] = int(v);
    }
    return d;
}

void put_field(std::vector<std::uint8_t>& out, const ScalarField& f) {
    put_dims(out, f.dims);
    for (float v : f.values) put_f32(out, v);
}

ScalarField read_field(Reader& r) {
    ScalarField f(read_dims(r));
    r.need(f.values.size() * 4);
    for (float& v : f.values) v = r.f32();
    return f;
}

void put_chunk(std::vector<std::uint8_t>& out, const char (&tag)[5], const std::vector<std::uint8_t>& payload) {
    put_tag(out, tag);
    put_u64(out, payload.size());
    out.insert(out.end(), payload.begin(), payload.end());
}

}  // namespace

std::vector<std::uint8_t> encode_vxl(const Scene& scene) {
    const VoxelModel& m = scene.model;
    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    put_dims(out, m.spec.dims);
    put_u8(out, std::uint8_t(m.spec.log2_bins()));
    put_u8(out, std::uint8_t(m.record_width()));
    put_u64(out, m.segment_count());
    for (std::size_t v = 0; v < m.voxel_count(); ++v) {
        put_u8(out, m.counts[v]);
        put_u32(out, m.offsets[v]);
    }
    out.insert(out.end(), m.records.begin(), m.records.end());
    for (const Rgba& c : m.transfer.entries) {
        put_f32(out, c.r);
        put_f32(out, c.g);
        put_f32(out, c.b);
        put_f32(out, c.a);
    }
    if (scene.octree.level_count() > 0) {
        std::vector<std::uint8_t> p;
        put_u32(p, std::uint32_t(scene.octree.level_count()));
        for (const auto& level : scene.octree.levels) put_field(p, level);
        put_chunk(out, "DENS", p);
    }
    if (!scene.replines.levels.empty()) {
        std::vector<std::uint8_t> p;
        put_u32(p, std::uint32_t(scene.replines.bins));
        put_u32(p, std::uint32_t(scene.replines.levels.size()));
        for (const auto& level : scene.replines.levels) {
            put_u32(p, std::uint32_t(level.level));
            put_dims(p, level.dims);
            for (const RepLine& l : level.lines) {
                put_u8(p, l.present ? 1 : 0);
                put_u8(p, l.face_in);
                put_u8(p, l.face_out);
                put_u32(p, l.bin_in);
                put_u32(p, l.bin_out);
                put_f32(p, l.weight);
            }
        }
        put_chunk(out, "REPL", p);
    }
    if (!scene.ao.empty()) {
        std::vector<std::uint8_t> p;
        put_field(p, scene.ao.values);
        put_chunk(out, "AOFD", p);
    }
    return out;
}

Scene decode_vxl(const std::vector<std::uint8_t>& data) {
    if (data.size() < 4 || std::memcmp(data.data(), kMagic, 4) != 0) throw FormatError("bad .vxl magic (expected VXL1)");
    Reader r(data, ".vxl file", 4);
    Scene scene;
    VoxelModel& m = scene.model;
    m.spec.dims = read_dims(r);
    const int log2n = r.u8();
    if (log2n < 1 || log2n > 8) throw FormatError("bad bin exponent " + std::to_string(log2n));
    m.spec.bins = 1 << log2n;
    const int width = r.u8();
    if (width != record_width(log2n))
        throw FormatError("record width " + std::to_string(width) + " does not match N=" + std::to_string(m.spec.bins));
    const std::uint64_t segments = r.u64();
    const std::size_t voxels = m.spec.voxel_count();
    r.need(voxels * std::size_t(kHeaderBytes));
    m.counts.resize(voxels);
    m.offsets.resize(voxels);
    std::uint64_t running = 0;
    for (std::size_t v = 0; v < voxels; ++v) {
        m.counts[v] = r.u8();
        m.offsets[v] = r.u32();
        if (m.offsets[v] != running) throw FormatError("voxel header offsets are not a prefix sum");
        running += m.counts[v];
    }
    if (running != segments) throw FormatError("segment count does not match voxel headers");
    const std::size_t record_bytes = std::size_t(segments) * std::size_t(width);
    const std::uint8_t* rec = r.take(record_bytes);
    m.records.assign(rec, rec + record_bytes);
    for (Rgba& c : m.transfer.entries) {
        c.r = r.f32();
        c.g = r.f32();
        c.b = r.f32();
        c.a = r.f32();
    }
    while (r.remaining() > 0) {
        const std::string tag = r.tag();
        const std::uint64_t len = r.u64();
        r.need(len);
        const std::size_t end = r.position() + std::size_t(len);
        if (tag == "DENS") {
            const std::uint32_t n = r.u32();
            for (std::uint32_t l = 0; l < n; ++l) scene.octree.levels.push_back(read_field(r));
            if (n == 0 || !(scene.octree.levels[0].dims == m.spec.dims))
                throw FormatError("density chunk does not match the grid");
        } else if (tag == "REPL") {
            scene.replines.bins = int(r.u32());
            const std::uint32_t n = r.u32();
            for (std::uint32_t l = 0; l < n; ++l) {
                RepLineLevel level;
                level.level = int(r.u32());
                level.dims = read_dims(r);
                level.lines.resize(std::size_t(level.dims.x) * level.dims.y * level.dims.z);
                r.need(level.lines.size() * 15);
                for (RepLine& line : level.lines) {
                    line.present = r.u8() != 0;
                    line.face_in = r.u8();
                    line.face_out = r.u8();
                    line.bin_in = r.u32();
                    line.bin_out = r.u32();
                    line.weight = r.f32();
                }
                scene.replines.levels.push_back(std::move(level));
            }
        } else if (tag == "AOFD") {
            scene.ao.values = read_field(r);
            if (!(scene.ao.values.dims == m.spec.dims)) throw FormatError("AO chunk does not match the grid");
        }
        if (r.position() > end) throw FormatError("chunk " + tag + " overruns its length");
        r.take(end - r.position());
    }
    return scene;
}

void save_vxl(const Scene& scene, const std::filesystem::path& path) {
    const auto data = encode_vxl(scene);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

Scene load_vxl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_vxl(data);
}

}  // namespace linevox
