#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "mfilab/lattice.hpp"
#include "mfilab/pointproc.hpp"

namespace mfilab {

/// 17 significant digits ("%.17g"); inf and nan spelled out.
std::string format_double(double x);

/// RFC-4180 field quoting.
std::string csv_escape(const std::string& field);

/// Header plus rows, comma separated, LF line endings.
std::string csv_document(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

/// Site coordinates x1..xd and the value, one row per observation site.
std::string field_csv(const FieldSample& field);

/// Columns x1..xd, t, then one column per decoration.
std::string points_csv(const PointConfiguration& points);

/// Pretty JSON with a trailing newline.
std::string json_text(const nlohmann::json& j);

/// Writes through a temporary file in the same directory and renames it into
/// place. Throws Io.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

}  // namespace mfilab
