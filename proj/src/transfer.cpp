#include "linevox/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace linevox {

namespace {

struct Stop {
    float t, r, g, b;
};

TransferTable from_stops(const std::vector<Stop>& stops, float opacity) {
    TransferTable table;
    for (int i = 0; i < 256; ++i) {
        const float t = float(i) / 255.0f;
        std::size_t k = 1;
        while (k + 1 < stops.size() && stops[k].t < t) ++k;
        const Stop& a = stops[k - 1];
        const Stop& b = stops[k];
        const float f = std::clamp((t - a.t) / (b.t - a.t), 0.0f, 1.0f);
        table.entries[std::size_t(i)] = {a.r + (b.r - a.r) * f, a.g + (b.g - a.g) * f, a.b + (b.b - a.b) * f,
                                         opacity};
    }
    return table;
}

}  // namespace

TransferTable TransferTable::preset(const std::string& name, float opacity) {
    if (name == "coolwarm")
        return from_stops({{0.0f, 0.23f, 0.30f, 0.75f}, {0.5f, 0.87f, 0.87f, 0.87f}, {1.0f, 0.71f, 0.02f, 0.15f}},
                          opacity);
    if (name == "viridis-ish")
        return from_stops({{0.0f, 0.27f, 0.00f, 0.33f},
                           {0.33f, 0.19f, 0.41f, 0.56f},
                           {0.66f, 0.21f, 0.72f, 0.47f},
                           {1.0f, 0.99f, 0.91f, 0.14f}},
                          opacity);
    if (name == "gray") return from_stops({{0.0f, 0.2f, 0.2f, 0.2f}, {1.0f, 1.0f, 1.0f, 1.0f}}, opacity);
    if (name == "white") return constant({1.0f, 1.0f, 1.0f, opacity});
    throw std::invalid_argument("unknown transfer preset '" + name + "'");
}

TransferTable TransferTable::constant(Rgba color) {
    TransferTable t;
    t.entries.fill(color);
    return t;
}

}  // namespace linevox
