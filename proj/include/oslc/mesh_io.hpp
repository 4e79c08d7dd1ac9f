#pragma once

#include <iosfwd>
#include <string>

#include "oslc/mesh.hpp"

namespace oslc {

struct MeshParseError : MeshError {
  int line;
  MeshParseError(const std::string& what, int line_)
      : MeshError(what + " (line " + std::to_string(line_) + ")"), line(line_) {}
};

// Parse a Triangle .node/.ele file pair into a 2-D mesh. Vertex order and
// connectivity are preserved; 0- and 1-based numbering is detected from the
// first node id. Lines starting with '#' are skipped.
Mesh import_triangle_mesh(const std::string& node_text, const std::string& ele_text);
Mesh import_triangle_files(const std::string& node_path, const std::string& ele_path);

// CSV pair: vertices.csv (id,x[,y]) and simplices.csv (id,v0,v1[,v2]).
void export_mesh_csv(const Mesh& mesh, const std::string& vertices_path,
                     const std::string& simplices_path);

}  // namespace oslc
