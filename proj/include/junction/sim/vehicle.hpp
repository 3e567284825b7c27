#pragma once

#include "junction/sim/geometry.hpp"

namespace junction::sim {

/// Normalized control: steer and throttle/brake, both in [-1, 1].
struct Action {
  double steer = 0.0;
  double throttle = 0.0;

  Action clamped() const;
  bool operator==(const Action&) const = default;
};

struct VehicleParams {
  double wheelbase = 2.5;
  double max_steer = 0.7;   // rad
  double max_accel = 2.0;   // m/s^2
  double max_brake = 4.0;   // m/s^2
  double max_speed = 10.0;  // m/s
  double max_reverse_speed = 2.0;
  double length = 4.5;
  double width = 2.0;
};

struct VehicleState {
  Vec2 position;
  double heading = 0.0;
  double speed = 0.0;
  double route_progress = 0.0;
  Action last_action;
  bool in_contact = false;
  bool off_road = false;
  bool arrived = false;
  bool active = true;

  bool operator==(const VehicleState&) const = default;
};

/// Kinematic bicycle model, semi-implicit Euler. The speed is updated first
/// and then drives both the yaw rate and the translation.
VehicleState bicycle_step(const VehicleState& state, const Action& action, double dt,
                          const VehicleParams& params = {});

OrientedBox footprint(const VehicleState& state, const VehicleParams& params = {});

}  // namespace junction::sim
