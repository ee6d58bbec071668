#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "linevox/transfer.hpp"

namespace linevox {

/// 8-bit RGBA, rows top to bottom.
struct Image {
    int width = 0, height = 0;
    std::vector<std::uint8_t> rgba;

    Image() = default;
    Image(int w, int h) : width(w), height(h), rgba(std::size_t(w) * std::size_t(h) * 4, 0) {}

    std::uint8_t* pixel(int x, int y) { return rgba.data() + (std::size_t(y) * width + x) * 4; }
    const std::uint8_t* pixel(int x, int y) const { return rgba.data() + (std::size_t(y) * width + x) * 4; }
    void set(int x, int y, const Rgba& c);

    bool operator==(const Image&) const = default;
};

/// clamp(x, 0, 1) * 255 rounded to nearest.
std::uint8_t to_byte(float x);

/// Binary PPM (P6), alpha dropped.
void write_ppm(const Image& img, const std::filesystem::path& path);
Image read_ppm(const std::filesystem::path& path);

bool png_supported();
std::vector<std::uint8_t> encode_png(const Image& img);
void write_png(const Image& img, const std::filesystem::path& path);

/// Picks the format from the extension (.png or .ppm).
void write_image(const Image& img, const std::filesystem::path& path);

}  // namespace linevox
