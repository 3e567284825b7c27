#include "junction/sim/vehicle.hpp"

#include <algorithm>
#include <cmath>

namespace junction::sim {

Action Action::clamped() const {
  auto c = [](double v) { return std::isfinite(v) ? std::clamp(v, -1.0, 1.0) : 0.0; };
  return {c(steer), c(throttle)};
}

VehicleState bicycle_step(const VehicleState& state, const Action& raw, double dt, const VehicleParams& params) {
  const Action a = raw.clamped();
  VehicleState next = state;
  next.last_action = a;

  const double v = state.speed;
  double v_next;
  if (a.throttle >= 0.0) {
    v_next = v + a.throttle * params.max_accel * dt;
  } else if (v > 0.0) {
    // Braking cannot push a forward-moving vehicle into reverse within one step.
    v_next = std::max(0.0, v + a.throttle * params.max_brake * dt);
  } else {
    v_next = v + a.throttle * params.max_accel * dt;
  }
  v_next = std::clamp(v_next, -params.max_reverse_speed, params.max_speed);

  next.speed = v_next;
  next.heading = wrap_angle(state.heading + (v_next / params.wheelbase) * std::tan(a.steer * params.max_steer) * dt);
  next.position = state.position + unit(next.heading) * (v_next * dt);
  return next;
}

OrientedBox footprint(const VehicleState& state, const VehicleParams& params) {
  return {state.position, state.heading, params.length / 2.0, params.width / 2.0};
}

}  // namespace junction::sim
