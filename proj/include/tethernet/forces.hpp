#pragma once

#include <algorithm>
#include <cmath>

#include "tethernet/assembly.hpp"
#include "tethernet/vec3.hpp"

namespace tethernet {

// Viscous coefficients are clamped per pair to mu_red/(2 dt) (mu_red the
// reduced mass). Explicit damping above that amplifies instead of damping;
// the clamp keeps the configured constants usable at light node masses.
inline double clamped_damping(double c, double mass_a, double mass_b, double dt) {
  const double mu = mass_a * mass_b / (mass_a + mass_b);
  return std::min(c, mu / (2.0 * dt));
}

struct CableForce {
  Vec3 on_a;  // on_b is the exact negation
  double tension = 0.0;
  bool degenerate = false;
};

// Tension-only spring-damper. Zero whenever elongation is non-positive; when
// stretched, tension = max(0, k*(len - l0) + c*dlen/dt) pulling the ends
// together. Coincident endpoints yield zero force and a degenerate flag.
inline CableForce cable_force(const Link& link, const Vec3& pos_a, const Vec3& pos_b,
                              const Vec3& vel_a, const Vec3& vel_b,
                              double mass_a, double mass_b, double dt) {
  CableForce out;
  const Vec3 d = pos_b - pos_a;
  const double len = d.norm();
  if (len < 1e-9) {
    out.degenerate = true;
    return out;
  }
  const double elongation = len - link.rest_length;
  if (elongation <= 0.0) return out;
  const Vec3 dir = d / len;
  const double rate = (vel_b - vel_a).dot(dir);
  const double c = clamped_damping(link.damping, mass_a, mass_b, dt);
  out.tension = std::max(0.0, link.stiffness * elongation + c * rate);
  out.on_a = dir * out.tension;
  return out;
}

struct ContactResult {
  Vec3 on_point;      // force on the node/MU
  Vec3 debris_force;  // reaction
  Vec3 debris_torque; // about debris COM, world frame
  bool touching = false;
};

// Penalty contact of a point against the debris' flat-capped cylinder.
// Normal: k_n*depth + c_n*max(0, -ddepth/dt), outward. Tangential:
// regularized Coulomb, -mu*|F_n|*tanh(|v_t|/v_reg). The reaction wrench
// keeps the pair momentum-exact.
inline ContactResult contact_point_cylinder(const Vec3& p, const Vec3& v,
                                            double point_mass,
                                            const Vec3& debris_pos, const Vec3& debris_vel,
                                            const Quat& debris_q, const Vec3& omega_body,
                                            double radius, double length,
                                            const ContactConfig& cp, double dt) {
  ContactResult out;
  const Vec3 rel = p - debris_pos;
  const Vec3 q = debris_q.rotate_inverse(rel);  // body frame, axis = x
  const double half = 0.5 * length;
  const double rho = std::sqrt(q.y * q.y + q.z * q.z);
  if (std::abs(q.x) >= half || rho >= radius) return out;

  const double depth_radial = radius - rho;
  const double depth_axial = half - std::abs(q.x);
  Vec3 n_body;
  double depth;
  if (depth_radial <= depth_axial) {
    depth = depth_radial;
    n_body = rho > 1e-12 ? Vec3{0.0, q.y / rho, q.z / rho} : Vec3{0.0, 1.0, 0.0};
  } else {
    depth = depth_axial;
    n_body = {q.x >= 0.0 ? 1.0 : -1.0, 0.0, 0.0};
  }
  const Vec3 n = debris_q.rotate(n_body);

  const Vec3 omega_world = debris_q.rotate(omega_body);
  const Vec3 v_surface = debris_vel + omega_world.cross(rel);
  const Vec3 v_rel = v - v_surface;
  const double depth_rate = -v_rel.dot(n);  // positive when penetrating deeper
  const double c_n = clamped_damping(cp.normal_damping, point_mass, 1e30, dt);
  const double fn = cp.normal_stiffness * depth + c_n * std::max(0.0, depth_rate);

  Vec3 force = n * fn;
  const Vec3 v_t = v_rel - n * v_rel.dot(n);
  const double vt = v_t.norm();
  if (vt > 1e-12 && cp.friction_coefficient > 0.0) {
    const double ft = cp.friction_coefficient * fn *
                      std::tanh(vt / cp.friction_regularization_velocity);
    force -= (v_t / vt) * ft;
  }
  out.on_point = force;
  out.debris_force = -force;
  out.debris_torque = rel.cross(-force);
  out.touching = true;
  return out;
}

struct TetherForce {
  Vec3 on_knot;  // on the winch point: exact negation
  double tension = 0.0;
};

// FreeSpool pays out with zero tension; Locked behaves as a tension-only
// spring-damper whose rest length froze at lock time.
inline TetherForce tether_force(const Vec3& knot_pos, const Vec3& knot_vel,
                                const Vec3& winch_pos, const Vec3& winch_vel,
                                WinchMode mode, double locked_length,
                                const TetherConfig& tc,
                                double knot_mass, double chaser_mass, double dt) {
  TetherForce out;
  if (mode == WinchMode::FreeSpool) return out;
  Link link{0, 0, locked_length, tc.stiffness, tc.damping};
  const CableForce f =
      cable_force(link, knot_pos, winch_pos, knot_vel, winch_vel, knot_mass, chaser_mass, dt);
  out.on_knot = f.on_a;
  out.tension = f.tension;
  return out;
}

}  // namespace tethernet
