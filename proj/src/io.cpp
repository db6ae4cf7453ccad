#include "mfilab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "mfilab/error.hpp"

namespace mfilab {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) {
    return field;
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_document(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(cells[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string field_csv(const FieldSample& field) {
  const Lattice lat = Lattice::observation(field.box);
  std::vector<std::string> header;
  for (int a = 0; a < field.box.dim; ++a) header.push_back("x" + std::to_string(a + 1));
  header.push_back("value");
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<std::size_t>(lat.size()));
  for (long s = 0; s < lat.size(); ++s) {
    const Point p = lat.site(s);
    std::vector<std::string> r;
    for (int a = 0; a < field.box.dim; ++a) r.push_back(format_double(p[a]));
    r.push_back(format_double(field.values[s]));
    rows.push_back(std::move(r));
  }
  return csv_document(header, rows);
}

std::string points_csv(const PointConfiguration& points) {
  std::vector<std::string> header;
  for (int a = 0; a < points.dim(); ++a) header.push_back("x" + std::to_string(a + 1));
  header.push_back("t");
  for (const auto& n : points.names) header.push_back(n);
  std::vector<std::vector<std::string>> rows;
  for (long i = 0; i < points.size(); ++i) {
    const Point p = points.position(i);
    std::vector<std::string> r;
    for (int a = 0; a < points.dim(); ++a) r.push_back(format_double(p[a]));
    r.push_back(format_double(points.time(i)));
    for (std::size_t k = 0; k < points.names.size(); ++k) {
      r.push_back(format_double(points.mark(i, static_cast<int>(k))));
    }
    rows.push_back(std::move(r));
  }
  return csv_document(header, rows);
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw Error(ErrorCode::Io, "cannot create " + path.parent_path().string());
    }
  }
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(static_cast<long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::Io, "cannot open " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot rename into " + path.string());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot read " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mfilab
