#pragma once

// Plane-Casting kinematics. The device orientation defines a constraint plane
// through a pivot; touch gestures translate the cursor inside that plane.
//
//   PivotPC: the pivot stays at the world origin. The cursor is stored in
//            plane-local (u, v), so rotating the device sweeps it through space.
//   FreePC:  the pivot rides on the cursor. Rotation only re-aims the plane.
//
// All operations are pure: they take a state by const reference and return a
// new one.

#include <stdexcept>
#include <string_view>

#include "planecast/math.hpp"

namespace planecast {

enum class TechniqueMode { PivotPC, FreePC };

std::string_view to_string(TechniqueMode mode);
/// Accepts "pivot" / "free" (the wire and CLI spelling).
TechniqueMode technique_from_string(std::string_view s);

/// Constraint plane. e1 is the device's screen-right axis, e2 its screen-top axis.
struct Plane {
  Vec3 pivot;
  Vec3 e1 = Vec3::unit_x();
  Vec3 e2 = -Vec3::unit_z();

  Vec3 normal() const { return cross(e1, e2); }
  bool operator==(const Plane&) const = default;
};

struct PlaneCoords {
  double u = 0.0;
  double v = 0.0;
  bool operator==(const PlaneCoords&) const = default;
};

struct PlanecastState {
  TechniqueMode mode = TechniqueMode::PivotPC;
  Plane plane;
  Vec3 cursor;
  PlaneCoords uv;
  double gain = 0.1;  // cm of cursor motion per px of finger motion

  bool operator==(const PlanecastState&) const = default;
};

/// Thrown for quaternions further than 1e-3 from unit norm, or non-finite input.
class InvalidOrientation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

constexpr double kUnitQuatTolerance = 1e-3;
/// Width of the plane rectangle in the scene; the default gain maps one
/// full-screen swipe onto it.
constexpr double kDefaultPlaneWidthCm = 40.0;

inline double default_gain(int screen_w_px) { return kDefaultPlaneWidthCm / screen_w_px; }

struct PlaneBasis {
  Vec3 e1;
  Vec3 e2;
};

/// q is the device orientation relative to the calibrated flat pose.
PlaneBasis device_to_plane_basis(const Quat& q);

/// Initial state at the reference pose: plane horizontal, cursor and pivot at the origin.
PlanecastState make_state(TechniqueMode mode, double gain);

PlanecastState apply_rotation(const PlanecastState& state, const Quat& q);

/// du is positive to the right on screen, dv positive downward (toward the user).
PlanecastState apply_touch(const PlanecastState& state, double du_px, double dv_px);

/// Lever arm |cursor - pivot| in cm per radian of plane rotation. Always 0 for FreePC.
double rotation_sensitivity(const PlanecastState& state);

}  // namespace planecast
