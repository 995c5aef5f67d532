#pragma once

namespace ubcn {

/// Rotary-wing UAV airframe and rotor parameters. Defaults describe the
/// reference quadrotor used throughout the project.
struct UavPhysics {
  double weight = 4.21;                  // W, newtons
  double air_density = 1.205;            // rho, kg/m^3
  double rotor_radius = 0.3;             // R, m
  double disc_area = 0.2827;             // A, m^2
  double blade_angular_velocity = 200;   // Omega, rad/s
  double tip_speed = 60;                 // U_tip, m/s
  int num_blades = 4;
  double chord = 0.0196;                 // m
  double rotor_solidity = 0.0832;        // s
  double flat_plate_area = 0.0118;       // S_FP, m^2
  double fuselage_drag_ratio = 0.5017;   // d_0
  double induced_correction = 0.1;       // k
  double mean_induced_velocity = 2.4868; // v_0, m/s
  double profile_drag = 0.012;           // delta

  bool operator==(const UavPhysics&) const = default;
};

/// Throws ConfigError unless every physical quantity is strictly positive.
void validate(const UavPhysics& physics);

/// Hover blade-profile power P_b = delta*rho*s*A*Omega^3*R^3/8.
double blade_profile_power(const UavPhysics& physics);

/// Hover induced power P_i = (1+k) W^{3/2} / sqrt(2 rho A).
double induced_power(const UavPhysics& physics);

/// Coefficient of V^3 in the parasite term, d_0*rho*s*A/2.
double parasite_coefficient(const UavPhysics& physics);

/// Normalized induced-power factor sqrt(sqrt(1 + V^4/(4 v0^4)) - V^2/(2 v0^2)).
/// Equals 1 in hover and decreases monotonically with speed.
double induced_factor(const UavPhysics& physics, double speed);

/// Propulsion power in watts at constant horizontal speed (m/s).
/// Throws std::invalid_argument for negative speed.
double propulsion_power(const UavPhysics& physics, double speed);

/// Speed minimizing propulsion_power, by golden-section search on
/// [0, upper] (defaults to U_tip/2) to the given tolerance.
double min_power_speed(const UavPhysics& physics, double upper = -1.0, double tol = 1e-4);

}  // namespace ubcn
