// SPDX-License-Identifier: Apache-2.0
#include "handact/mesh/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace handact::mesh {

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw MeshError(MeshError::Kind::ParseError, "line " + std::to_string(line) + ": " + what);
}

// Reads the next line that is neither blank nor a comment.
bool next_content_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, std::size_t lineno) {
  double value = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end) parse_error(lineno, "bad number '" + tok + "'");
  return value;
}

long parse_long(const std::string& tok, std::size_t lineno) {
  long value = 0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end) parse_error(lineno, "bad integer '" + tok + "'");
  return value;
}

}  // namespace

std::optional<MeshFormat> format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".off") return MeshFormat::Off;
  if (ext == ".obj") return MeshFormat::Obj;
  return std::nullopt;
}

TriangleMesh read_off(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!next_content_line(in, line, lineno)) parse_error(lineno, "empty file");

  std::vector<std::string> tok = split_ws(line);
  if (tok.empty() || tok[0] != "OFF") parse_error(lineno, "missing OFF header");
  tok.erase(tok.begin());
  if (tok.empty()) {
    if (!next_content_line(in, line, lineno)) parse_error(lineno, "missing element counts");
    tok = split_ws(line);
  }
  if (tok.size() < 2) parse_error(lineno, "expected vertex and face counts");
  const long nv = parse_long(tok[0], lineno);
  const long nf = parse_long(tok[1], lineno);
  if (nv < 0 || nf < 0) parse_error(lineno, "negative element count");

  TriangleMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  mesh.faces.reserve(static_cast<std::size_t>(nf));
  for (long i = 0; i < nv; ++i) {
    if (!next_content_line(in, line, lineno)) {
      parse_error(lineno, "expected " + std::to_string(nv) + " vertices, found " +
                              std::to_string(i));
    }
    tok = split_ws(line);
    if (tok.size() < 3) parse_error(lineno, "vertex needs three coordinates");
    mesh.vertices.emplace_back(parse_double(tok[0], lineno), parse_double(tok[1], lineno),
                               parse_double(tok[2], lineno));
  }
  for (long i = 0; i < nf; ++i) {
    if (!next_content_line(in, line, lineno)) {
      parse_error(lineno, "expected " + std::to_string(nf) + " faces, found " + std::to_string(i));
    }
    tok = split_ws(line);
    const long n = parse_long(tok[0], lineno);
    if (n != 3) parse_error(lineno, "only triangles are supported, got a " + std::to_string(n) + "-gon");
    if (tok.size() < 4) parse_error(lineno, "face lists fewer than three indices");
    Face face{};
    for (int c = 0; c < 3; ++c) face[c] = static_cast<int>(parse_long(tok[1 + c], lineno));
    mesh.faces.push_back(face);
  }
  validate(mesh);
  return mesh;
}

TriangleMesh read_obj(std::istream& in) {
  TriangleMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  while (next_content_line(in, line, lineno)) {
    const std::vector<std::string> tok = split_ws(line);
    if (tok[0] == "v") {
      if (tok.size() < 4) parse_error(lineno, "vertex needs three coordinates");
      mesh.vertices.emplace_back(parse_double(tok[1], lineno), parse_double(tok[2], lineno),
                                 parse_double(tok[3], lineno));
    } else if (tok[0] == "f") {
      if (tok.size() != 4) {
        parse_error(lineno, "only triangles are supported, got " + std::to_string(tok.size() - 1) +
                                " face vertices");
      }
      Face face{};
      for (int c = 0; c < 3; ++c) {
        const std::string idx = tok[1 + c].substr(0, tok[1 + c].find('/'));
        long v = parse_long(idx, lineno);
        // OBJ is 1-based; negative indices count back from the last vertex.
        v = v < 0 ? static_cast<long>(mesh.vertices.size()) + v : v - 1;
        face[c] = static_cast<int>(v);
      }
      mesh.faces.push_back(face);
    }
  }
  validate(mesh);
  return mesh;
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw MeshError(MeshError::Kind::IoError, "cannot open " + path.string());
  return format == MeshFormat::Off ? read_off(in) : read_obj(in);
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  const auto format = format_from_path(path);
  if (!format) throw MeshError(MeshError::Kind::ParseError, "unknown mesh extension: " + path.string());
  return load_mesh(path, *format);
}

void write_off(std::ostream& out, const TriangleMesh& mesh, int decimals) {
  out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.faces.size() << " 0\n";
  char buf[32];
  for (const Vec3& v : mesh.vertices) {
    for (int c = 0; c < 3; ++c) {
      auto res = decimals < 0
                     ? std::to_chars(buf, buf + sizeof(buf), v[c])
                     : std::to_chars(buf, buf + sizeof(buf), v[c], std::chars_format::fixed, decimals);
      out << std::string_view(buf, res.ptr - buf) << (c == 2 ? '\n' : ' ');
    }
  }
  for (const Face& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void save_off(const std::filesystem::path& path, const TriangleMesh& mesh, int decimals) {
  std::ofstream out(path);
  if (!out) throw MeshError(MeshError::Kind::IoError, "cannot write " + path.string());
  write_off(out, mesh, decimals);
}

}  // namespace handact::mesh
