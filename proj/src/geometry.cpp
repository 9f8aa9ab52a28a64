#include "planecast/geometry.hpp"

#include <string>

namespace planecast {

std::string_view to_string(TechniqueMode mode) {
  return mode == TechniqueMode::PivotPC ? "pivot" : "free";
}

TechniqueMode technique_from_string(std::string_view s) {
  if (s == "pivot") return TechniqueMode::PivotPC;
  if (s == "free") return TechniqueMode::FreePC;
  throw std::invalid_argument("unknown technique '" + std::string(s) + "' (expected pivot|free)");
}

namespace {

Quat checked_unit(const Quat& q) {
  if (!is_finite(q)) throw InvalidOrientation("orientation has non-finite components");
  const double n = norm(q);
  if (std::abs(n - 1.0) > kUnitQuatTolerance) {
    throw InvalidOrientation("orientation is not a unit quaternion (norm " + std::to_string(n) +
                             ")");
  }
  return Quat{q.w / n, q.x / n, q.y / n, q.z / n};
}

Vec3 on_plane(const Plane& plane, PlaneCoords uv) {
  return plane.pivot + uv.u * plane.e1 + uv.v * plane.e2;
}

}  // namespace

PlaneBasis device_to_plane_basis(const Quat& q) {
  const Quat unit = checked_unit(q);
  return {rotate(unit, Vec3::unit_x()), rotate(unit, -Vec3::unit_z())};
}

PlanecastState make_state(TechniqueMode mode, double gain) {
  if (!(gain > 0.0) || !std::isfinite(gain)) {
    throw std::invalid_argument("gain must be positive and finite");
  }
  PlanecastState s;
  s.mode = mode;
  s.gain = gain;
  return s;
}

PlanecastState apply_rotation(const PlanecastState& state, const Quat& q) {
  const PlaneBasis basis = device_to_plane_basis(q);
  PlanecastState next = state;
  next.plane.e1 = basis.e1;
  next.plane.e2 = basis.e2;
  if (state.mode == TechniqueMode::PivotPC) {
    next.cursor = on_plane(next.plane, next.uv);
  }
  return next;
}

PlanecastState apply_touch(const PlanecastState& state, double du_px, double dv_px) {
  if (!std::isfinite(du_px) || !std::isfinite(dv_px)) {
    throw std::invalid_argument("touch delta must be finite");
  }
  if (du_px == 0.0 && dv_px == 0.0) return state;

  PlanecastState next = state;
  const double du = state.gain * du_px;
  const double dv = -state.gain * dv_px;
  if (state.mode == TechniqueMode::PivotPC) {
    next.uv.u += du;
    next.uv.v += dv;
    next.cursor = on_plane(next.plane, next.uv);
  } else {
    next.cursor = state.cursor + du * state.plane.e1 + dv * state.plane.e2;
    next.plane.pivot = next.cursor;
  }
  return next;
}

double rotation_sensitivity(const PlanecastState& state) {
  if (state.mode == TechniqueMode::FreePC) return 0.0;
  return std::hypot(state.uv.u, state.uv.v);
}

}  // namespace planecast
