#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace linevox {

struct Rgba {
    float r = 0, g = 0, b = 0, a = 0;
    bool operator==(const Rgba&) const = default;
};

/// 256-entry attribute -> color/opacity table indexed by a segment's attr_index.
struct TransferTable {
    std::array<Rgba, 256> entries{};

    const Rgba& operator[](std::uint8_t i) const { return entries[i]; }
    Rgba& operator[](std::uint8_t i) { return entries[i]; }
    bool operator==(const TransferTable&) const = default;

    /// Named presets: "coolwarm" (default), "viridis-ish", "gray", "white".
    static TransferTable preset(const std::string& name, float opacity = 1.0f);
    static TransferTable constant(Rgba color);
};

inline std::uint8_t attr_to_index(float attr) {
    const float c = attr < 0.0f ? 0.0f : (attr > 1.0f ? 1.0f : attr);
    return std::uint8_t(c * 255.0f + 0.5f);
}

}  // namespace linevox
