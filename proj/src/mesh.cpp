#include "parctl/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>

#include "parctl/errors.hpp"

namespace parctl {

Mesh1D Mesh1D::uniform(double left, double right, int n_el) {
  if (n_el < 1) throw InvalidArgument("Mesh1D: need at least one element");
  if (!(right > left)) throw InvalidArgument("Mesh1D: empty interval");
  Mesh1D mesh;
  mesh.left = left;
  mesh.right = right;
  mesh.nodes.resize(n_el + 1);
  for (int i = 0; i <= n_el; ++i) {
    mesh.nodes[i] = left + (right - left) * static_cast<double>(i) / n_el;
  }
  mesh.nodes.back() = right;
  return mesh;
}

Mesh1D Mesh1D::refined(int factor) const {
  if (factor < 1) throw InvalidArgument("Mesh1D::refined: factor must be >= 1");
  Mesh1D fine;
  fine.left = left;
  fine.right = right;
  fine.nodes.reserve(n_el() * factor + 1);
  for (int e = 0; e < n_el(); ++e) {
    const double a = nodes[e], b = nodes[e + 1];
    for (int k = 0; k < factor; ++k) fine.nodes.push_back(a + (b - a) * k / factor);
  }
  fine.nodes.push_back(right);
  return fine;
}

void Mesh1D::validate() const {
  if (nodes.size() < 2) throw InvalidArgument("Mesh1D: fewer than two nodes");
  if (nodes.front() != left || nodes.back() != right) {
    throw InvalidArgument("Mesh1D: end nodes do not match the domain endpoints");
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) throw InvalidArgument("Mesh1D: nodes not strictly increasing");
  }
}

bool MeshLShape::contains(const Point2& p, double tol) {
  const auto [x, y] = p;
  if (x < -1 - tol || x > 1 + tol || y < -1 - tol || y > 1 + tol) return false;
  // removed quadrant (-1,0) x (0,1)
  return !(x < -tol && y > tol);
}

bool MeshLShape::on_boundary(const Point2& p, double tol) {
  const auto [x, y] = p;
  if (!contains(p, tol)) return false;
  if (std::abs(x + 1) <= tol || std::abs(x - 1) <= tol) return true;
  if (std::abs(y + 1) <= tol || std::abs(y - 1) <= tol) return true;
  if (std::abs(x) <= tol && y >= -tol) return true;  // notch edge x = 0, y in [0,1]
  if (std::abs(y) <= tol && x <= tol) return true;   // notch edge y = 0, x in [-1,0]
  return false;
}

MeshLShape MeshLShape::build(double h) {
  if (!(h > 0.0)) throw InvalidArgument("MeshLShape: h must be positive");
  if (h > 0.5) throw InvalidArgument("MeshLShape: h too coarse to resolve the reentrant corner");
  const int n = static_cast<int>(std::ceil(1.0 / h - 1e-9));

  MeshLShape mesh;
  mesh.cells_per_unit = n;
  mesh.h = 1.0 / n;
  const double step = mesh.h;

  // grid vertices indexed by (i, j) in [0, 2n]^2, coordinate -1 + i*step
  std::map<std::pair<int, int>, int> grid_id;
  auto grid_vertex = [&](int i, int j) {
    auto it = grid_id.find({i, j});
    if (it != grid_id.end()) return it->second;
    const int id = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back({-1.0 + i * step, -1.0 + j * step});
    grid_id.emplace(std::make_pair(i, j), id);
    return id;
  };

  for (int j = 0; j < 2 * n; ++j) {
    for (int i = 0; i < 2 * n; ++i) {
      if (i < n && j >= n) continue;  // cell inside the removed quadrant
      const int v00 = grid_vertex(i, j);
      const int v10 = grid_vertex(i + 1, j);
      const int v11 = grid_vertex(i + 1, j + 1);
      const int v01 = grid_vertex(i, j + 1);
      const int c = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back({-1.0 + (i + 0.5) * step, -1.0 + (j + 0.5) * step});
      mesh.triangles.push_back({v00, v10, c});
      mesh.triangles.push_back({v10, v11, c});
      mesh.triangles.push_back({v11, v01, c});
      mesh.triangles.push_back({v01, v00, c});
    }
  }

  mesh.boundary.resize(mesh.vertices.size());
  const double tol = 1e-9 * step;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    mesh.boundary[v] = on_boundary(mesh.vertices[v], tol);
  }
  return mesh;
}

double MeshLShape::signed_area(int tri) const {
  const auto& t = triangles[tri];
  const Point2& a = vertices[t[0]];
  const Point2& b = vertices[t[1]];
  const Point2& c = vertices[t[2]];
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

double MeshLShape::min_angle_degrees() const {
  double best = 180.0;
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      const Point2& p = vertices[t[k]];
      const Point2& q = vertices[t[(k + 1) % 3]];
      const Point2& r = vertices[t[(k + 2) % 3]];
      const double ux = q[0] - p[0], uy = q[1] - p[1];
      const double vx = r[0] - p[0], vy = r[1] - p[1];
      const double c = (ux * vx + uy * vy) / (std::hypot(ux, uy) * std::hypot(vx, vy));
      best = std::min(best, std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi);
    }
  }
  return best;
}

void dump_mesh(std::ostream& os, const Mesh1D& mesh) {
  os.precision(17);
  const int last = static_cast<int>(mesh.nodes.size()) - 1;
  for (int i = 0; i <= last; ++i) {
    os << "node " << i << ' ' << mesh.nodes[i] << ' ' << ((i == 0 || i == last) ? 1 : 0) << '\n';
  }
  for (int e = 0; e < mesh.n_el(); ++e) os << "elem " << e << ' ' << e << ' ' << e + 1 << '\n';
}

void dump_mesh(std::ostream& os, const MeshLShape& mesh) {
  os.precision(17);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    os << "node " << i << ' ' << mesh.vertices[i][0] << ' ' << mesh.vertices[i][1] << ' '
       << (mesh.boundary[i] ? 1 : 0) << '\n';
  }
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const auto& t = mesh.triangles[e];
    os << "elem " << e << ' ' << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
}

}  // namespace parctl
