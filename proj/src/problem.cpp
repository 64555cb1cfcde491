#include "parctl/problem.hpp"

#include <cmath>
#include <sstream>

#include "parctl/errors.hpp"

namespace parctl {

bool ProblemSpec::has_source() const {
  for (const auto& s : segments)
    if (s.f.size() > 0 && !s.f.isZero(0.0)) return true;
  return false;
}

void ProblemSpec::validate(int dim) const {
  if (!(horizon > 0) || !std::isfinite(horizon)) throw InvalidArgument("problem: horizon T must be positive");
  if (!(alpha > 0) || !std::isfinite(alpha)) throw InvalidArgument("problem: alpha must be positive");
  if (!(epsilon > 0)) throw InvalidArgument("problem: epsilon must be positive");
  if (segments.empty()) throw InvalidArgument("problem: at least one time segment is required");
  if (ystar.size() != dim) throw DimensionMismatch("problem: target y* has wrong length");
  double t = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    std::ostringstream where;
    where << "problem: segment " << i;
    if (s.begin != t) throw InvalidArgument(where.str() + " does not start where the previous one ended");
    if (!(s.end > s.begin)) throw InvalidArgument(where.str() + " has non-increasing breakpoints");
    if (!(s.beta >= 0) || !std::isfinite(s.beta)) throw InvalidArgument(where.str() + " has negative beta");
    if (s.w.size() != 0 && s.w.size() != dim) throw DimensionMismatch(where.str() + ": w has wrong length");
    if (s.f.size() != 0 && s.f.size() != dim) throw DimensionMismatch(where.str() + ": f has wrong length");
    t = s.end;
  }
  if (std::abs(t - horizon) > 1e-14 * horizon) throw InvalidArgument("problem: segments do not end at T");
}

MeshFunction ProblemSpec::w_of(std::size_t segment, int dim) const {
  const auto& w = segments.at(segment).w;
  return w.size() == 0 ? MeshFunction::Zero(dim) : w;
}

MeshFunction ProblemSpec::f_of(std::size_t segment, int dim) const {
  const auto& f = segments.at(segment).f;
  return f.size() == 0 ? MeshFunction::Zero(dim) : f;
}

std::vector<TimeSegment> window_segments(double horizon, double a, double b, double beta_value,
                                         const MeshFunction& w, const MeshFunction& f) {
  if (!(0 < a && a < b && b < horizon)) throw InvalidArgument("window_segments: need 0 < a < b < T");
  return {
      TimeSegment{0.0, a, 0.0, w, f},
      TimeSegment{a, b, beta_value, w, f},
      TimeSegment{b, horizon, 0.0, w, f},
  };
}

}  // namespace parctl
