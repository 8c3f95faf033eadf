#pragma once

#include "hwlab/field.hpp"

#include <filesystem>

namespace hwlab::io {

/// Writes `<path>` (binary container) and `<path>.json` (metadata sidecar).
/// Layout is described in docs/field_format.md.
void write_field(const std::filesystem::path& path, const Field& f);
Field read_field(const std::filesystem::path& path);

}  // namespace hwlab::io
