#include "crtg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace crtg {

std::string to_string(Domain d) { return d == Domain::square ? "square" : "lshape"; }

Domain parse_domain(const std::string& name) {
  if (name == "square") return Domain::square;
  if (name == "lshape") return Domain::lshape;
  throw std::invalid_argument("unknown domain '" + name + "' (expected square|lshape)");
}

double domain_area(Domain domain) { return domain == Domain::square ? 1.0 : 0.75; }

std::size_t TriangleMesh::num_boundary_edges() const {
  return static_cast<std::size_t>(std::count(edge_boundary.begin(), edge_boundary.end(), 1));
}

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double triangle_area(const TriangleMesh& mesh, std::size_t t) {
  const auto p = mesh.triangle_points(t);
  return signed_area(p[0], p[1], p[2]);
}

double total_area(const TriangleMesh& mesh) {
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) sum += triangle_area(mesh, t);
  return sum;
}

double edge_length(const TriangleMesh& mesh, std::size_t e) {
  const Point& a = mesh.vertices[mesh.edges[e][0]];
  const Point& b = mesh.vertices[mesh.edges[e][1]];
  return std::hypot(b.x - a.x, b.y - a.y);
}

std::vector<Point> edge_midpoints(const TriangleMesh& mesh) {
  std::vector<Point> mids(mesh.num_edges());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e)
    mids[e] = midpoint(mesh.vertices[mesh.edges[e][0]], mesh.vertices[mesh.edges[e][1]]);
  return mids;
}

TriangleMesh make_mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
                       int level) {
  TriangleMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  mesh.level = level;

  const auto nv = static_cast<std::uint64_t>(mesh.vertices.size());
  const std::size_t nt = mesh.triangles.size();
  if (nt == 0) throw std::invalid_argument("mesh has no triangles");

  for (std::size_t t = 0; t < nt; ++t) {
    for (int v : mesh.triangles[t])
      if (v < 0 || static_cast<std::uint64_t>(v) >= nv)
        throw std::invalid_argument("triangle " + std::to_string(t) + " has an out-of-range vertex");
    if (!(triangle_area(mesh, t) > 0.0))
      throw std::invalid_argument("triangle " + std::to_string(t) + " has non-positive area");
  }

  // (edge key, 3 * triangle + local edge)
  std::vector<std::pair<std::uint64_t, std::uint64_t>> half_edges;
  half_edges.reserve(3 * nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      auto a = static_cast<std::uint64_t>(tri[(i + 1) % 3]);
      auto b = static_cast<std::uint64_t>(tri[(i + 2) % 3]);
      if (a > b) std::swap(a, b);
      half_edges.emplace_back(a * nv + b, 3 * t + static_cast<std::uint64_t>(i));
    }
  }
  std::sort(half_edges.begin(), half_edges.end());

  mesh.tri_edges.assign(nt, {-1, -1, -1});
  for (std::size_t k = 0; k < half_edges.size();) {
    std::size_t end = k + 1;
    while (end < half_edges.size() && half_edges[end].first == half_edges[k].first) ++end;
    if (end - k > 2) throw std::invalid_argument("non-manifold edge shared by more than two triangles");

    const int e = static_cast<int>(mesh.edges.size());
    const std::uint64_t key = half_edges[k].first;
    mesh.edges.push_back({static_cast<int>(key / nv), static_cast<int>(key % nv)});
    std::array<int, 2> adjacent{-1, -1};
    for (std::size_t j = k; j < end; ++j) {
      const auto t = half_edges[j].second / 3;
      const auto i = half_edges[j].second % 3;
      mesh.tri_edges[t][i] = e;
      adjacent[j - k] = static_cast<int>(t);
    }
    mesh.edge_triangles.push_back(adjacent);
    mesh.edge_boundary.push_back(end - k == 1 ? 1 : 0);
    k = end;
  }

  mesh.h = 0.0;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) mesh.h = std::max(mesh.h, edge_length(mesh, e));
  return mesh;
}

namespace {

// Keeps the grid cells selected by `keep`, splitting each along its lower-left to
// upper-right diagonal. Unused grid vertices are dropped.
template <typename Keep>
TriangleMesh build_grid_mesh(int n, Keep keep) {
  const int stride = n + 1;
  std::vector<int> index(static_cast<std::size_t>(stride) * stride, -1);
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;

  auto vertex = [&](int i, int j) {
    int& id = index[static_cast<std::size_t>(j) * stride + i];
    if (id < 0) {
      id = static_cast<int>(vertices.size());
      vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    }
    return id;
  };

  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!keep(i, j)) continue;
      const int ll = vertex(i, j);
      const int lr = vertex(i + 1, j);
      const int ur = vertex(i + 1, j + 1);
      const int ul = vertex(i, j + 1);
      triangles.push_back({ll, lr, ur});
      triangles.push_back({ll, ur, ul});
    }
  }
  return make_mesh(std::move(vertices), std::move(triangles));
}

}  // namespace

TriangleMesh build_unit_square_mesh(int n) {
  if (n < 1) throw std::invalid_argument("unit square mesh needs n >= 1, got " + std::to_string(n));
  return build_grid_mesh(n, [](int, int) { return true; });
}

TriangleMesh build_lshape_mesh(int n) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("L-shape mesh needs an even n >= 2, got " + std::to_string(n));
  const int half = n / 2;
  return build_grid_mesh(n, [half](int i, int j) { return i < half || j < half; });
}

TriangleMesh build_mesh(Domain domain, int n) {
  return domain == Domain::square ? build_unit_square_mesh(n) : build_lshape_mesh(n);
}

TriangleMesh uniform_refine(const TriangleMesh& mesh) {
  const int nv = static_cast<int>(mesh.num_vertices());
  std::vector<Point> vertices = mesh.vertices;
  vertices.reserve(mesh.num_vertices() + mesh.num_edges());
  for (const Point& m : edge_midpoints(mesh)) vertices.push_back(m);

  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(4 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangles[t];
    const auto& e = mesh.tri_edges[t];
    // m_i is the midpoint of the edge opposite v_i
    const int m0 = nv + e[0];
    const int m1 = nv + e[1];
    const int m2 = nv + e[2];
    triangles.push_back({v[0], m2, m1});
    triangles.push_back({m2, v[1], m0});
    triangles.push_back({m1, m0, v[2]});
    triangles.push_back({m0, m1, m2});
  }
  return make_mesh(std::move(vertices), std::move(triangles), mesh.level + 1);
}

void write_mesh(std::ostream& os, const TriangleMesh& mesh) {
  os.precision(17);
  for (const Point& p : mesh.vertices) os << "v " << p.x << ' ' << p.y << '\n';
  for (const auto& t : mesh.triangles) os << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace crtg
