#pragma once

#include <filesystem>

#include <json.hpp>

#include "linevox/render.hpp"

namespace linevox {

/// All RenderParams fields under their own names; enums as their CLI spellings.
nlohmann::json params_to_json(const RenderParams& p);

/// Overwrites only the fields present in `j`. Unknown keys or bad values throw
/// std::invalid_argument; the result is validated.
void apply_params_json(RenderParams& p, const nlohmann::json& j);

/// Reads a JSON object from disk (std::runtime_error on I/O or syntax errors).
nlohmann::json load_json_file(const std::filesystem::path& path);

}  // namespace linevox
