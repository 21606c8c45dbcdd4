#include "placekit/ply.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "placekit/errors.hpp"

namespace placekit {

namespace {

enum class Scalar { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

Scalar scalar_from_name(std::string_view name, std::size_t offset) {
  if (name == "char" || name == "int8") return Scalar::kInt8;
  if (name == "uchar" || name == "uint8") return Scalar::kUInt8;
  if (name == "short" || name == "int16") return Scalar::kInt16;
  if (name == "ushort" || name == "uint16") return Scalar::kUInt16;
  if (name == "int" || name == "int32") return Scalar::kInt32;
  if (name == "uint" || name == "uint32") return Scalar::kUInt32;
  if (name == "float" || name == "float32") return Scalar::kFloat32;
  if (name == "double" || name == "float64") return Scalar::kFloat64;
  throw ParseError("unknown PLY scalar type '" + std::string(name) + "'", offset);
}

std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::kInt8:
    case Scalar::kUInt8:
      return 1;
    case Scalar::kInt16:
    case Scalar::kUInt16:
      return 2;
    case Scalar::kInt32:
    case Scalar::kUInt32:
    case Scalar::kFloat32:
      return 4;
    case Scalar::kFloat64:
      return 8;
  }
  return 0;
}

bool is_float(Scalar s) { return s == Scalar::kFloat32 || s == Scalar::kFloat64; }

struct Property {
  std::string name;
  Scalar type = Scalar::kFloat32;
  bool is_list = false;
  Scalar count_type = Scalar::kUInt8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

// Sequential reader over the body of the file, ASCII or binary.
class BodyReader {
 public:
  BodyReader(std::string_view bytes, std::size_t pos, bool ascii)
      : bytes_(bytes), pos_(pos), ascii_(ascii) {}

  double read(Scalar type) {
    if (ascii_) return read_token();
    const std::size_t n = scalar_size(type);
    if (pos_ + n > bytes_.size()) throw ParseError("unexpected end of PLY body", pos_);
    unsigned char buf[8];
    std::memcpy(buf, bytes_.data() + pos_, n);
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + n);
    pos_ += n;
    switch (type) {
      case Scalar::kInt8: {
        std::int8_t v;
        std::memcpy(&v, buf, 1);
        return v;
      }
      case Scalar::kUInt8:
        return buf[0];
      case Scalar::kInt16: {
        std::int16_t v;
        std::memcpy(&v, buf, 2);
        return v;
      }
      case Scalar::kUInt16: {
        std::uint16_t v;
        std::memcpy(&v, buf, 2);
        return v;
      }
      case Scalar::kInt32: {
        std::int32_t v;
        std::memcpy(&v, buf, 4);
        return v;
      }
      case Scalar::kUInt32: {
        std::uint32_t v;
        std::memcpy(&v, buf, 4);
        return v;
      }
      case Scalar::kFloat32: {
        float v;
        std::memcpy(&v, buf, 4);
        return v;
      }
      case Scalar::kFloat64: {
        double v;
        std::memcpy(&v, buf, 8);
        return v;
      }
    }
    return 0.0;
  }

  std::size_t position() const { return pos_; }

 private:
  double read_token() {
    while (pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError("unexpected end of PLY body", start);
    double value = 0.0;
    const char* first = bytes_.data() + start;
    const char* last = bytes_.data() + pos_;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) throw ParseError("malformed PLY number", start, pos_ - start);
    return value;
  }

  std::string_view bytes_;
  std::size_t pos_;
  bool ascii_;
};

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) words.push_back(line.substr(start, i - start));
  }
  return words;
}

int find_property(const Element& e, std::initializer_list<std::string_view> names) {
  for (std::size_t i = 0; i < e.properties.size(); ++i)
    for (std::string_view n : names)
      if (e.properties[i].name == n) return static_cast<int>(i);
  return -1;
}

}  // namespace

TriangleMesh parse_ply(std::string_view bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::pair<std::string_view, std::size_t> {
    if (pos >= bytes.size()) throw ParseError("PLY header is not terminated", pos);
    const std::size_t start = pos;
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    pos = std::min(end + 1, bytes.size());
    std::string_view line = bytes.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return {line, start};
  };

  if (next_line().first != "ply") throw ParseError("missing 'ply' magic", 0);
  bool ascii = false;
  bool have_format = false;
  std::vector<Element> elements;
  for (;;) {
    const auto [line, at] = next_line();
    const auto words = split_words(line);
    if (words.empty() || words[0] == "comment" || words[0] == "obj_info") continue;
    if (words[0] == "end_header") break;
    if (words[0] == "format") {
      if (words.size() < 2) throw ParseError("malformed format line", at);
      if (words[1] == "ascii") {
        ascii = true;
      } else if (words[1] == "binary_little_endian") {
        ascii = false;
      } else {
        throw ParseError("unsupported PLY format '" + std::string(words[1]) + "'", at);
      }
      have_format = true;
    } else if (words[0] == "element") {
      if (words.size() != 3) throw ParseError("malformed element line", at);
      Element e;
      e.name = std::string(words[1]);
      const auto [ptr, ec] =
          std::from_chars(words[2].data(), words[2].data() + words[2].size(), e.count);
      if (ec != std::errc()) throw ParseError("malformed element count", at);
      elements.push_back(std::move(e));
    } else if (words[0] == "property") {
      if (elements.empty()) throw ParseError("property before any element", at);
      Property p;
      if (words.size() == 5 && words[1] == "list") {
        p.is_list = true;
        p.count_type = scalar_from_name(words[2], at);
        p.type = scalar_from_name(words[3], at);
        p.name = std::string(words[4]);
      } else if (words.size() == 3) {
        p.type = scalar_from_name(words[1], at);
        p.name = std::string(words[2]);
      } else {
        throw ParseError("malformed property line", at);
      }
      elements.back().properties.push_back(std::move(p));
    } else {
      throw ParseError("unexpected PLY header keyword '" + std::string(words[0]) + "'", at);
    }
  }
  if (!have_format) throw ParseError("PLY header has no format line", 0);

  TriangleMesh mesh;
  BodyReader body(bytes, pos, ascii);
  bool seen_vertex = false;
  for (const Element& e : elements) {
    const std::size_t element_start = body.position();
    if (e.name == "vertex") {
      seen_vertex = true;
      const int ix = find_property(e, {"x"});
      const int iy = find_property(e, {"y"});
      const int iz = find_property(e, {"z"});
      if (ix < 0 || iy < 0 || iz < 0) throw ParseError("vertex element lacks x/y/z", element_start);
      const int ir = find_property(e, {"red", "diffuse_red", "r"});
      const int ig = find_property(e, {"green", "diffuse_green", "g"});
      const int ib = find_property(e, {"blue", "diffuse_blue", "b"});
      const bool colored = ir >= 0 && ig >= 0 && ib >= 0;
      mesh.vertices.reserve(e.count);
      if (colored) mesh.colors.reserve(e.count);
      std::vector<double> values(e.properties.size());
      for (std::size_t v = 0; v < e.count; ++v) {
        const std::size_t at = body.position();
        for (std::size_t k = 0; k < e.properties.size(); ++k) {
          const Property& p = e.properties[k];
          if (p.is_list) {
            const auto n = static_cast<std::size_t>(body.read(p.count_type));
            for (std::size_t j = 0; j < n; ++j) body.read(p.type);
            values[k] = 0.0;
          } else {
            values[k] = body.read(p.type);
          }
        }
        const Vec3 pos3{values[ix], values[iy], values[iz]};
        if (!is_finite(pos3)) throw ParseError("non-finite vertex position", at);
        mesh.vertices.push_back(pos3);
        if (colored) {
          auto channel = [&](int k) {
            const double raw = values[k];
            return is_float(e.properties[k].type) ? raw : raw / 255.0;
          };
          mesh.colors.push_back({channel(ir), channel(ig), channel(ib)});
        }
      }
    } else if (e.name == "face") {
      const int il = find_property(e, {"vertex_indices", "vertex_index"});
      if (il < 0 || !e.properties[il].is_list)
        throw ParseError("face element lacks a vertex_indices list", element_start);
      mesh.triangles.reserve(e.count);
      std::vector<std::uint32_t> poly;
      for (std::size_t f = 0; f < e.count; ++f) {
        const std::size_t at = body.position();
        for (std::size_t k = 0; k < e.properties.size(); ++k) {
          const Property& p = e.properties[k];
          if (!p.is_list) {
            body.read(p.type);
            continue;
          }
          const double count = body.read(p.count_type);
          if (count < 0 || count != std::floor(count)) throw ParseError("bad list count", at);
          const auto n = static_cast<std::size_t>(count);
          poly.clear();
          for (std::size_t j = 0; j < n; ++j) {
            const double idx = body.read(p.type);
            if (idx < 0 || idx != std::floor(idx)) throw ParseError("bad vertex index", at);
            poly.push_back(static_cast<std::uint32_t>(idx));
          }
          if (static_cast<int>(k) != il) continue;
          if (n < 3) throw ParseError("face with fewer than 3 vertices", at);
          for (const std::uint32_t i : poly)
            if (seen_vertex && i >= mesh.vertices.size())
              throw ParseError("face index " + std::to_string(i) + " out of range", at);
          for (std::size_t j = 1; j + 1 < n; ++j) mesh.triangles.push_back({poly[0], poly[j], poly[j + 1]});
        }
      }
    } else {
      for (std::size_t r = 0; r < e.count; ++r)
        for (const Property& p : e.properties) {
          if (p.is_list) {
            const auto n = static_cast<std::size_t>(body.read(p.count_type));
            for (std::size_t j = 0; j < n; ++j) body.read(p.type);
          } else {
            body.read(p.type);
          }
        }
    }
  }
  if (!seen_vertex) throw ParseError("PLY file has no vertex element", pos);
  return mesh;
}

namespace {

std::uint8_t to_byte(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

std::string format_ply(const TriangleMesh& mesh, PlyFormat format) {
  const bool colored = !mesh.colors.empty();
  std::ostringstream header;
  header << "ply\nformat " << (format == PlyFormat::kAscii ? "ascii" : "binary_little_endian")
         << " 1.0\ncomment placekit\n";
  header << "element vertex " << mesh.vertices.size() << "\n";
  header << "property double x\nproperty double y\nproperty double z\n";
  if (colored) header << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (!mesh.triangles.empty()) {
    header << "element face " << mesh.triangles.size() << "\n";
    header << "property list uchar uint vertex_indices\n";
  }
  header << "end_header\n";
  std::string out = header.str();
  if (format == PlyFormat::kAscii) {
    std::ostringstream body;
    body.precision(17);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      const Vec3& v = mesh.vertices[i];
      body << v.x << ' ' << v.y << ' ' << v.z;
      if (colored) {
        const Rgb& c = mesh.colors[i];
        body << ' ' << int(to_byte(c.r)) << ' ' << int(to_byte(c.g)) << ' ' << int(to_byte(c.b));
      }
      body << '\n';
    }
    for (const Triangle& t : mesh.triangles) body << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out += body.str();
    return out;
  }
  out.reserve(out.size() + mesh.vertices.size() * 27 + mesh.triangles.size() * 13);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    put(out, v.x);
    put(out, v.y);
    put(out, v.z);
    if (colored) {
      const Rgb& c = mesh.colors[i];
      put(out, to_byte(c.r));
      put(out, to_byte(c.g));
      put(out, to_byte(c.b));
    }
  }
  for (const Triangle& t : mesh.triangles) {
    put(out, std::uint8_t{3});
    put(out, t[0]);
    put(out, t[1]);
    put(out, t[2]);
  }
  return out;
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + file.string());
  return ss.str();
}

void write_file(const std::filesystem::path& file, std::string_view bytes) {
  if (file.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(file.parent_path(), ec);
  }
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + file.string());
}

TriangleMesh read_ply(const std::filesystem::path& file) { return parse_ply(read_file(file)); }

void write_ply(const std::filesystem::path& file, const TriangleMesh& mesh, PlyFormat format) {
  write_file(file, format_ply(mesh, format));
}

PointCloud read_point_ply(const std::filesystem::path& file) {
  TriangleMesh mesh = read_ply(file);
  PointCloud cloud;
  cloud.positions = std::move(mesh.vertices);
  cloud.colors = std::move(mesh.colors);
  if (cloud.colors.empty()) cloud.colors.assign(cloud.positions.size(), Rgb{});
  return cloud;
}

void write_point_ply(const std::filesystem::path& file, const PointCloud& points) {
  TriangleMesh mesh;
  mesh.vertices = points.positions;
  mesh.colors = points.colors;
  write_ply(file, mesh);
}

}  // namespace placekit
