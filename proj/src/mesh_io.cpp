#include "oslc/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace oslc {

namespace {

// Yields non-comment, non-blank lines with their 1-based line numbers.
struct LineReader {
  std::istringstream in;
  int line = 0;
  explicit LineReader(const std::string& text) : in(text) {}

  bool next(std::string& out) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++line;
      const auto pos = raw.find_first_not_of(" \t\r");
      if (pos == std::string::npos || raw[pos] == '#') continue;
      out = raw;
      return true;
    }
    return false;
  }
};

std::vector<double> parse_numbers(const std::string& s, int line, size_t min_count) {
  std::istringstream iss(s);
  std::vector<double> out;
  double v;
  while (iss >> v) out.push_back(v);
  if (out.size() < min_count)
    throw MeshParseError("expected at least " + std::to_string(min_count) + " fields", line);
  return out;
}

}  // namespace

Mesh import_triangle_mesh(const std::string& node_text, const std::string& ele_text) {
  LineReader nodes(node_text);
  std::string s;
  if (!nodes.next(s)) throw MeshParseError("missing .node header", nodes.line);
  const auto hdr = parse_numbers(s, nodes.line, 2);
  const int nv = static_cast<int>(hdr[0]);
  const int dim = static_cast<int>(hdr[1]);
  if (nv < 1) throw MeshParseError("node count must be positive", nodes.line);
  if (dim != 2) throw MeshParseError(".node dimension must be 2", nodes.line);

  std::vector<Vec> verts(nv);
  int base = 0;
  for (int n = 0; n < nv; ++n) {
    if (!nodes.next(s)) throw MeshParseError("unexpected end of .node records", nodes.line);
    const auto rec = parse_numbers(s, nodes.line, 3);
    const int id = static_cast<int>(rec[0]);
    if (n == 0) {
      if (id != 0 && id != 1) throw MeshParseError("first node id must be 0 or 1", nodes.line);
      base = id;
    }
    const int idx = id - base;
    if (idx != n) throw MeshParseError("node ids must be consecutive", nodes.line);
    verts[idx] = Vec(rec[1], rec[2]);
  }

  LineReader eles(ele_text);
  if (!eles.next(s)) throw MeshParseError("missing .ele header", eles.line);
  const auto ehdr = parse_numbers(s, eles.line, 2);
  const int nt = static_cast<int>(ehdr[0]);
  const int npt = static_cast<int>(ehdr[1]);
  if (nt < 1) throw MeshParseError("triangle count must be positive", eles.line);
  if (npt != 3) throw MeshParseError("only 3-node triangles are supported", eles.line);

  std::vector<std::array<int, 3>> simp(nt);
  for (int t = 0; t < nt; ++t) {
    if (!eles.next(s)) throw MeshParseError("unexpected end of .ele records", eles.line);
    const auto rec = parse_numbers(s, eles.line, 4);
    std::array<int, 3> tri;
    for (int m = 0; m < 3; ++m) {
      const int v = static_cast<int>(rec[1 + m]) - base;
      if (v < 0 || v >= nv)
        throw MeshParseError("triangle references node " +
                                 std::to_string(static_cast<int>(rec[1 + m])) +
                                 " outside the node file",
                             eles.line);
      tri[m] = v;
    }
    simp[t] = tri;
  }
  return Mesh(2, std::move(verts), std::move(simp));
}

Mesh import_triangle_files(const std::string& node_path, const std::string& ele_path) {
  auto slurp = [](const std::string& path) {
    std::ifstream f(path);
    if (!f) throw MeshError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  return import_triangle_mesh(slurp(node_path), slurp(ele_path));
}

void export_mesh_csv(const Mesh& mesh, const std::string& vertices_path,
                     const std::string& simplices_path) {
  std::ofstream vf(vertices_path);
  if (!vf) throw MeshError("cannot write " + vertices_path);
  vf << (mesh.dim() == 1 ? "id,x\n" : "id,x,y\n");
  char buf[96];
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const Vec& v = mesh.vertex(i);
    if (mesh.dim() == 1)
      std::snprintf(buf, sizeof buf, "%d,%.17g\n", i, v.x);
    else
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", i, v.x, v.y);
    vf << buf;
  }
  std::ofstream sf(simplices_path);
  if (!sf) throw MeshError("cannot write " + simplices_path);
  sf << (mesh.dim() == 1 ? "id,v0,v1\n" : "id,v0,v1,v2\n");
  for (int s = 0; s < mesh.simplex_count(); ++s) {
    const auto& sp = mesh.simplex(s);
    sf << s << ',' << sp[0] << ',' << sp[1];
    if (mesh.dim() == 2) sf << ',' << sp[2];
    sf << '\n';
  }
}

}  // namespace oslc
