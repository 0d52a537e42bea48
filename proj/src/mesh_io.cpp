#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "diskharm/error.hpp"
#include "diskharm/mesh.hpp"

namespace dh {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw MeshError("line " + std::to_string(line) + ": " + what);
}

// OBJ face token "i", "i/t", "i//n" or "i/t/n"; negative indices are relative.
int parse_obj_index(const std::string& token, std::size_t line, std::size_t nverts) {
  const std::string head = token.substr(0, token.find('/'));
  long value = 0;
  const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), value);
  if (ec != std::errc() || ptr != head.data() + head.size() || value == 0) {
    parse_error(line, "bad face index '" + token + "'");
  }
  const long idx = value > 0 ? value - 1 : static_cast<long>(nverts) + value;
  if (idx < 0) parse_error(line, "face index '" + token + "' out of range");
  return static_cast<int>(idx);
}

}  // namespace

TriMesh read_obj(std::istream& in) {
  TriMesh mesh;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    std::istringstream ls(raw);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) parse_error(line, "expected 'v x y z'");
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) idx.push_back(parse_obj_index(tok, line, mesh.vertices.size()));
      if (idx.size() != 3) {
        throw MeshError("line " + std::to_string(line) + ": face " + std::to_string(mesh.faces.size()) +
                        " has " + std::to_string(idx.size()) + " vertices; only triangles are supported");
      }
      mesh.faces.push_back({idx[0], idx[1], idx[2]});
    }
    // vt, vn, o, g, s, usemtl, mtllib and friends are ignored.
  }
  check_faces(mesh);
  return mesh;
}

namespace {

enum class PlyFormat { Ascii, BinaryLE };

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

std::size_t ply_type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  throw MeshError("PLY: unknown property type '" + t + "'");
}

double read_binary_scalar(std::istream& in, const std::string& t) {
  static_assert(std::endian::native == std::endian::little, "binary PLY reader assumes little-endian host");
  char buf[8];
  const std::size_t n = ply_type_size(t);
  if (!in.read(buf, static_cast<std::streamsize>(n))) throw MeshError("PLY: unexpected end of binary data");
  auto get = [&](auto v) {
    std::memcpy(&v, buf, sizeof(v));
    return static_cast<double>(v);
  };
  if (t == "char" || t == "int8") return get(std::int8_t{});
  if (t == "uchar" || t == "uint8") return get(std::uint8_t{});
  if (t == "short" || t == "int16") return get(std::int16_t{});
  if (t == "ushort" || t == "uint16") return get(std::uint16_t{});
  if (t == "int" || t == "int32") return get(std::int32_t{});
  if (t == "uint" || t == "uint32") return get(std::uint32_t{});
  if (t == "float" || t == "float32") return get(float{});
  return get(double{});
}

}  // namespace

TriMesh read_ply(std::istream& in) {
  std::string raw;
  if (!std::getline(in, raw) || raw.rfind("ply", 0) != 0) throw MeshError("PLY: missing 'ply' magic");
  PlyFormat format = PlyFormat::Ascii;
  std::vector<PlyElement> elements;
  std::size_t line = 1;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::istringstream ls(raw);
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") {
        format = PlyFormat::Ascii;
      } else if (fmt == "binary_little_endian") {
        format = PlyFormat::BinaryLE;
      } else {
        parse_error(line, "unsupported PLY format '" + fmt + "'");
      }
    } else if (tag == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (tag == "property") {
      if (elements.empty()) parse_error(line, "property before element");
      PlyProperty p;
      std::string first;
      ls >> first;
      if (first == "list") {
        p.is_list = true;
        ls >> p.count_type >> p.type >> p.name;
      } else {
        p.type = first;
        ls >> p.name;
      }
      elements.back().props.push_back(p);
    } else if (tag == "end_header") {
      break;
    }
  }

  TriMesh mesh;
  for (const PlyElement& e : elements) {
    const bool is_vertex = e.name == "vertex";
    const bool is_face = e.name == "face";
    for (std::size_t i = 0; i < e.count; ++i) {
      Vec3 p = Vec3::Zero();
      std::vector<int> idx;
      std::istringstream ls;
      if (format == PlyFormat::Ascii) {
        do {
          if (!std::getline(in, raw)) throw MeshError("PLY: unexpected end of file in element " + e.name);
          ++line;
        } while (raw.find_first_not_of(" \t\r") == std::string::npos);
        ls.str(raw);
      }
      auto scalar = [&](const std::string& type) {
        if (format == PlyFormat::BinaryLE) return read_binary_scalar(in, type);
        double v = 0.0;
        if (!(ls >> v)) parse_error(line, "malformed " + e.name + " record");
        return v;
      };
      for (const PlyProperty& prop : e.props) {
        if (prop.is_list) {
          const auto n = static_cast<std::size_t>(scalar(prop.count_type));
          for (std::size_t k = 0; k < n; ++k) {
            const double v = scalar(prop.type);
            if (is_face && (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
              idx.push_back(static_cast<int>(v));
            }
          }
        } else {
          const double v = scalar(prop.type);
          if (is_vertex) {
            if (prop.name == "x") p.x() = v;
            if (prop.name == "y") p.y() = v;
            if (prop.name == "z") p.z() = v;
          }
        }
      }
      if (is_vertex) mesh.vertices.push_back(p);
      if (is_face) {
        if (idx.size() != 3) {
          throw MeshError("face " + std::to_string(mesh.faces.size()) + " has " + std::to_string(idx.size()) +
                          " vertices; only triangles are supported");
        }
        mesh.faces.push_back({idx[0], idx[1], idx[2]});
      }
    }
  }
  check_faces(mesh);
  return mesh;
}

TriMesh load_mesh(const std::filesystem::path& path) {
  const std::string ext = lowercase(path.extension().string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MeshError("cannot open " + path.string());
  if (ext == ".obj") return read_obj(in);
  if (ext == ".ply") return read_ply(in);
  throw MeshError("unsupported mesh format '" + ext + "' (expected .obj or .ply)");
}

void write_obj(const TriMesh& mesh, std::ostream& out) {
  char buf[128];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const Face& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

void save_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_obj(mesh, out);
}

}  // namespace dh
