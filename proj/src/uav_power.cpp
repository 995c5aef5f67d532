#include "ubcn/uav_power.hpp"

#include <cmath>
#include <stdexcept>

#include "ubcn/errors.hpp"

namespace ubcn {

void validate(const UavPhysics& p) {
  const double fields[] = {p.weight,          p.air_density,        p.rotor_radius,
                           p.disc_area,       p.blade_angular_velocity, p.tip_speed,
                           p.chord,           p.rotor_solidity,     p.flat_plate_area,
                           p.fuselage_drag_ratio, p.induced_correction, p.mean_induced_velocity,
                           p.profile_drag};
  for (double v : fields) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("UAV physics parameters must be positive and finite");
  }
  if (p.num_blades <= 0) throw ConfigError("UAV must have at least one blade");
}

double blade_profile_power(const UavPhysics& p) {
  const double omega_r = p.blade_angular_velocity * p.rotor_radius;
  return p.profile_drag * p.air_density * p.rotor_solidity * p.disc_area * omega_r * omega_r * omega_r / 8.0;
}

double induced_power(const UavPhysics& p) {
  return (1.0 + p.induced_correction) * std::pow(p.weight, 1.5) / std::sqrt(2.0 * p.air_density * p.disc_area);
}

double parasite_coefficient(const UavPhysics& p) {
  return 0.5 * p.fuselage_drag_ratio * p.air_density * p.rotor_solidity * p.disc_area;
}

double induced_factor(const UavPhysics& p, double speed) {
  const double a = speed * speed / (p.mean_induced_velocity * p.mean_induced_velocity);
  // sqrt(1 + a^2/4) - a/2 rewritten as 1/(sqrt(1 + a^2/4) + a/2): no cancellation at high speed.
  return std::sqrt(1.0 / (std::sqrt(1.0 + 0.25 * a * a) + 0.5 * a));
}

double propulsion_power(const UavPhysics& p, double speed) {
  if (speed < 0.0 || !std::isfinite(speed)) throw std::invalid_argument("propulsion_power: speed must be non-negative");
  const double u = speed / p.tip_speed;
  return blade_profile_power(p) * (1.0 + 3.0 * u * u) + induced_power(p) * induced_factor(p, speed) +
         parasite_coefficient(p) * speed * speed * speed;
}

double min_power_speed(const UavPhysics& p, double upper, double tol) {
  if (upper <= 0.0) upper = 0.5 * p.tip_speed;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = upper;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = propulsion_power(p, x1);
  double f2 = propulsion_power(p, x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = propulsion_power(p, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = propulsion_power(p, x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace ubcn
