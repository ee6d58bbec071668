#include "linevox/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#ifdef LINEVOX_HAVE_PNG
#include <png.h>
#endif

namespace linevox {

std::uint8_t to_byte(float x) {
    return std::uint8_t(std::clamp(x, 0.0f, 1.0f) * 255.0f + 0.5f);
}

void Image::set(int x, int y, const Rgba& c) {
    std::uint8_t* p = pixel(x, y);
    p[0] = to_byte(c.r);
    p[1] = to_byte(c.g);
    p[2] = to_byte(c.b);
    p[3] = to_byte(c.a);
}

void write_ppm(const Image& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    std::vector<char> row(std::size_t(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const auto* p = img.pixel(x, y);
            std::memcpy(&row[std::size_t(x) * 3], p, 3);
        }
        out.write(row.data(), std::streamsize(row.size()));
    }
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P6" || w < 1 || h < 1 || maxval != 255) throw std::runtime_error("unsupported PPM: " + path.string());
    in.get();
    Image img(w, h);
    std::vector<char> row(std::size_t(w) * 3);
    for (int y = 0; y < h; ++y) {
        if (!in.read(row.data(), std::streamsize(row.size()))) throw std::runtime_error("truncated PPM: " + path.string());
        for (int x = 0; x < w; ++x) {
            auto* p = img.pixel(x, y);
            std::memcpy(p, &row[std::size_t(x) * 3], 3);
            p[3] = 255;
        }
    }
    return img;
}

#ifdef LINEVOX_HAVE_PNG

bool png_supported() { return true; }

std::vector<std::uint8_t> encode_png(const Image& img) {
    png_image desc;
    std::memset(&desc, 0, sizeof desc);
    desc.version = PNG_IMAGE_VERSION;
    desc.width = png_uint_32(img.width);
    desc.height = png_uint_32(img.height);
    desc.format = PNG_FORMAT_RGBA;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&desc, nullptr, &size, 0, img.rgba.data(), 0, nullptr))
        throw std::runtime_error(std::string("png encode failed: ") + desc.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&desc, out.data(), &size, 0, img.rgba.data(), 0, nullptr))
        throw std::runtime_error(std::string("png encode failed: ") + desc.message);
    out.resize(size);
    return out;
}

#else

bool png_supported() { return false; }

std::vector<std::uint8_t> encode_png(const Image&) {
    throw std::runtime_error("built without PNG support");
}

#endif

void write_png(const Image& img, const std::filesystem::path& path) {
    const auto bytes = encode_png(img);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_image(const Image& img, const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    if (ext == ".png") write_png(img, path);
    else if (ext == ".ppm") write_ppm(img, path);
    else throw std::invalid_argument("unknown image extension '" + ext + "' (use .ppm or .png)");
}

}  // namespace linevox
