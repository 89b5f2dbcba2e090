#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "rdfleet/model.hpp"

namespace rdfleet {

/// Parse the sectioned model text format (grammar in docs/model-format.md).
/// Relative mesh file paths resolve against `base_dir`. When `attach` is true the
/// mesh is built and installed. Syntax errors throw ParseError with a line number.
ModelSpec parse_model(std::string_view text, const std::filesystem::path& base_dir = {}, bool attach = true);
ModelSpec load_model(const std::filesystem::path& path, bool attach = true);

/// Canonical text form; `parse_model(serialize_model(m))` yields an equivalent model.
/// Numbers use shortest round-trip formatting, so the output is deterministic.
std::string serialize_model(const ModelSpec& model);

std::string format_double(double v);

}  // namespace rdfleet
