#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace crtg {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point midpoint(const Point& a, const Point& b) {
  return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

enum class Domain { square, lshape };

std::string to_string(Domain d);
Domain parse_domain(const std::string& name);

/// Conforming triangulation with the edge topology needed by edge-based elements.
///
/// Local edge i of a triangle is the edge opposite its local vertex i. Edges are
/// stored with the smaller vertex index first. Meshes produced by uniform_refine
/// number the four children of coarse triangle t as 4t, 4t+1, 4t+2, 4t+3, so the
/// ancestor of fine triangle t after d refinements is t >> 2d; `level` counts the
/// refinements applied since the mesh was generated.
struct TriangleMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> tri_edges;
  std::vector<std::array<int, 2>> edge_triangles;  // second entry -1 on the boundary
  std::vector<std::uint8_t> edge_boundary;
  double h = 0.0;
  int level = 0;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  std::size_t num_edges() const { return edges.size(); }
  std::size_t num_boundary_edges() const;

  std::array<Point, 3> triangle_points(std::size_t t) const {
    const auto& tri = triangles[t];
    return {vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]};
  }
};

/// Builds edges, adjacency, boundary flags and h from vertices and CCW triangles.
/// Throws std::invalid_argument on non-manifold edges or non-positive areas.
TriangleMesh make_mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
                       int level = 0);

TriangleMesh build_unit_square_mesh(int n);
TriangleMesh build_lshape_mesh(int n);
TriangleMesh build_mesh(Domain domain, int n);

/// Red refinement: every triangle is split into four congruent children.
TriangleMesh uniform_refine(const TriangleMesh& mesh);

double signed_area(const Point& a, const Point& b, const Point& c);
double triangle_area(const TriangleMesh& mesh, std::size_t t);
double total_area(const TriangleMesh& mesh);
std::vector<Point> edge_midpoints(const TriangleMesh& mesh);
double edge_length(const TriangleMesh& mesh, std::size_t e);

/// Area of the domain covered by build_mesh(domain, n).
double domain_area(Domain domain);

/// Plain-text `v x y` / `t i j k` export.
void write_mesh(std::ostream& os, const TriangleMesh& mesh);

}  // namespace crtg
