#pragma once

#include <array>
#include <iosfwd>
#include <vector>

namespace parctl {

using Point2 = std::array<double, 2>;

/// Interval mesh [left, right] with strictly increasing nodes.
struct Mesh1D {
  double left = 0.0;
  double right = 0.0;
  std::vector<double> nodes;

  int n_el() const { return static_cast<int>(nodes.size()) - 1; }

  /// Uniform mesh with n_el elements. Throws for n_el < 1 or right <= left.
  static Mesh1D uniform(double left, double right, int n_el);

  /// Uniformly refines every element into `factor` pieces.
  Mesh1D refined(int factor) const;

  void validate() const;
};

/// Structured criss-cross triangulation of the L-shaped domain
/// [-1,1]^2 \ ((-1,0) x (0,1)).
///
/// Each h x h cell of the three unit squares gets a centre vertex and is cut
/// into four right triangles, so all angles are 45 or 90 degrees.
struct MeshLShape {
  double h = 0.0;
  int cells_per_unit = 0;
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<bool> boundary;

  /// Builds the mesh with ceil(1/h) cells per unit length.
  /// Rejects h <= 0 and h > 1/2 (the reentrant corner needs at least two
  /// cells per unit to carry an interior vertex on every side).
  static MeshLShape build(double h);

  static bool contains(const Point2& p, double tol = 1e-12);
  static bool on_boundary(const Point2& p, double tol = 1e-12);

  double signed_area(int tri) const;
  double min_angle_degrees() const;
};

/// Plain-text dumps: one `node <id> <x> [<y>] <boundary>` line per vertex
/// followed by one `elem <id> <v0> <v1> [<v2>]` line per element.
void dump_mesh(std::ostream& os, const Mesh1D& mesh);
void dump_mesh(std::ostream& os, const MeshLShape& mesh);

}  // namespace parctl
