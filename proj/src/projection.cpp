#include "parctl/projection.hpp"

#include <algorithm>
#include <cmath>

#include "parctl/errors.hpp"

namespace parctl {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_indicator(const FieldDescriptor& d) {
  return std::holds_alternative<IntervalIndicator>(d) || std::holds_alternative<L1BallIndicator>(d);
}

// int over [xl, xr] of the hat functions of the two element nodes restricted to [lo, hi]
void hat_integrals(double xl, double xr, double lo, double hi, double& left, double& right) {
  lo = std::max(lo, xl);
  hi = std::min(hi, xr);
  left = right = 0.0;
  if (hi <= lo) return;
  const double h = xr - xl;
  left = ((xr - lo) * (xr - lo) - (xr - hi) * (xr - hi)) / (2.0 * h);
  right = ((hi - xl) * (hi - xl) - (lo - xl) * (lo - xl)) / (2.0 * h);
}

MeshFunction lumped_interval(const DiscreteOperator& op, const Mesh1D& mesh, const IntervalIndicator& ind) {
  MeshFunction load = MeshFunction::Zero(op.dim());
  const auto& g = op.geometry();
  for (int e = 0; e < mesh.n_el(); ++e) {
    double l, r;
    hat_integrals(mesh.nodes[e], mesh.nodes[e + 1], ind.a, ind.b, l, r);
    if (const int d = g.vertex_to_dof[e]; d >= 0) load[d] += l;
    if (const int d = g.vertex_to_dof[e + 1]; d >= 0) load[d] += r;
  }
  return load.cwiseQuotient(op.mass());
}

using Polygon = std::vector<Point2>;

// Sutherland-Hodgman clip against the half plane n.x <= c.
Polygon clip(const Polygon& poly, double nx, double ny, double c) {
  Polygon out;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % m];
    const double fp = nx * p[0] + ny * p[1] - c;
    const double fq = nx * q[0] + ny * q[1] - c;
    if (fp <= 0) out.push_back(p);
    if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
      const double s = fp / (fp - fq);
      out.push_back({p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])});
    }
  }
  return out;
}

MeshFunction lumped_l1_ball(const DiscreteOperator& op, const MeshLShape& mesh, const L1BallIndicator& ball) {
  MeshFunction load = MeshFunction::Zero(op.dim());
  const auto& g = op.geometry();
  const auto [cx, cy] = ball.center;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    Polygon poly{mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
    for (const double sx : {1.0, -1.0}) {
      for (const double sy : {1.0, -1.0}) {
        poly = clip(poly, sx, sy, ball.radius + sx * cx + sy * cy);
        if (poly.empty()) break;
      }
      if (poly.empty()) break;
    }
    if (poly.size() < 3) continue;
    // area and centroid of the clipped polygon; phi_k is linear so its integral is area * phi_k(centroid)
    double area = 0.0, gx = 0.0, gy = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point2& p = poly[i];
      const Point2& q = poly[(i + 1) % poly.size()];
      const double cross = p[0] * q[1] - q[0] * p[1];
      area += cross;
      gx += (p[0] + q[0]) * cross;
      gy += (p[1] + q[1]) * cross;
    }
    area *= 0.5;
    if (std::abs(area) < 1e-300) continue;
    gx /= 6.0 * area;
    gy /= 6.0 * area;
    const double tri_area = mesh.signed_area(static_cast<int>(t));
    for (int k = 0; k < 3; ++k) {
      const int d = g.vertex_to_dof[tri[k]];
      if (d < 0) continue;
      const Point2& p = mesh.vertices[tri[(k + 1) % 3]];
      const Point2& q = mesh.vertices[tri[(k + 2) % 3]];
      const double sub = 0.5 * ((p[0] - gx) * (q[1] - gy) - (q[0] - gx) * (p[1] - gy));
      load[d] += std::abs(area) * sub / tri_area;
    }
  }
  return load.cwiseQuotient(op.mass());
}

}  // namespace

double evaluate_descriptor(const FieldDescriptor& descriptor, const Point2& x) {
  return std::visit(
      Overloaded{
          [&](const IntervalIndicator& d) { return (x[0] >= d.a && x[0] <= d.b) ? 1.0 : 0.0; },
          [&](const L1BallIndicator& d) {
            return std::abs(x[0] - d.center[0]) + std::abs(x[1] - d.center[1]) <= d.radius ? 1.0 : 0.0;
          },
          [&](const GaussianSum& d) {
            double s = 0.0;
            for (const auto& b : d.bumps) {
              const double dx = x[0] - b.center[0], dy = x[1] - b.center[1];
              s += b.amplitude * std::exp(-b.rate * (dx * dx + dy * dy));
            }
            return s;
          },
          [&](const PiecewiseLinear1D& d) {
            if (d.nodes.size() != d.values.size() || d.nodes.size() < 2) {
              throw InvalidArgument("PiecewiseLinear1D: malformed node/value lists");
            }
            if (x[0] <= d.nodes.front()) return d.values.front();
            if (x[0] >= d.nodes.back()) return d.values.back();
            const auto it = std::upper_bound(d.nodes.begin(), d.nodes.end(), x[0]);
            const std::size_t k = static_cast<std::size_t>(it - d.nodes.begin()) - 1;
            const double s = (x[0] - d.nodes[k]) / (d.nodes[k + 1] - d.nodes[k]);
            return (1.0 - s) * d.values[k] + s * d.values[k + 1];
          },
          [&](const PointwiseFunction& d) { return d.f(x); },
          [&](const SampledValues&) -> double {
            throw InvalidArgument("SampledValues cannot be evaluated pointwise");
          },
      },
      descriptor);
}

MeshFunction project_to_mesh(const DiscreteOperator& op, const FieldDescriptor& descriptor, ProjectionMode mode) {
  if (const auto* s = std::get_if<SampledValues>(&descriptor)) {
    if (s->values.size() != op.dim()) throw DimensionMismatch("project_to_mesh: sampled values have wrong length");
    return s->values;
  }
  if (mode == ProjectionMode::automatic) {
    mode = is_indicator(descriptor) ? ProjectionMode::lumped_l2 : ProjectionMode::nodal;
  }
  const auto& mesh = op.geometry().mesh;
  if (mode == ProjectionMode::lumped_l2) {
    if (const auto* ind = std::get_if<IntervalIndicator>(&descriptor)) {
      if (const auto* m1 = std::get_if<Mesh1D>(&mesh)) return lumped_interval(op, *m1, *ind);
    } else if (const auto* ball = std::get_if<L1BallIndicator>(&descriptor)) {
      if (const auto* m2 = std::get_if<MeshLShape>(&mesh)) return lumped_l1_ball(op, *m2, *ball);
    } else {
      throw InvalidArgument("project_to_mesh: lumped projection is only available for indicators");
    }
    throw InvalidArgument("project_to_mesh: indicator does not match the mesh dimension");
  }
  MeshFunction out(op.dim());
  for (int i = 0; i < op.dim(); ++i) out[i] = evaluate_descriptor(descriptor, op.geometry().dof_point(i));
  return out;
}

double mass_fraction_inside(const DiscreteOperator& op, const MeshFunction& v, const L1BallIndicator& ball) {
  double inside = 0.0;
  for (int i = 0; i < op.dim(); ++i) {
    const Point2 p = op.geometry().dof_point(i);
    if (std::abs(p[0] - ball.center[0]) + std::abs(p[1] - ball.center[1]) <= ball.radius) {
      inside += op.mass()[i] * v[i] * v[i];
    }
  }
  const double total = inner_m(op, v, v);
  return total > 0.0 ? inside / total : 0.0;
}

}  // namespace parctl
