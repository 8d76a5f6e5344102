#ifndef AMS_SPHERICAL_HPP
#define AMS_SPHERICAL_HPP

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "ams/rng.hpp"

namespace ams {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Closest approach allowed between a pole and a receiver; 1/r attenuation is
// clamped below this radius.
inline constexpr double kMinPoleDistance = 0.1;

// Receiver-relative position: r in meters, polar angle from +z, azimuth in
// [-pi, pi).
struct AngularPosition {
  double r = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

struct ShIndex {
  int n = 0;
  int m = 0;
  int flat() const { return n * n + n + m; }
  static ShIndex from_flat(int flat);
};

// Orthonormal real spherical harmonic, Condon-Shortley phase excluded.
// Throws ConfigError for |m| > n.
double real_sph_harm(const ShIndex& idx, const AngularPosition& dir);

// All (order+1)^2 harmonics evaluated from a unit direction vector via their
// Cartesian polynomial forms, flat-index order. Supports order <= 3.
void real_sph_harm_cartesian(int order, const Vec3& unit,
                             std::span<double> out);

// Relative position of the pole seen from the receiver. r is clamped to
// kMinPoleDistance when the two points (nearly) coincide; the direction is
// kept.
AngularPosition to_angular(const Vec3& x_p, const Vec3& x_r);

// Golden-angle lattice of `count` unit vectors. Throws ConfigError for
// count < 1.
std::vector<Vec3> fibonacci_sphere(int count);

// Uniform random rotation via a normalized quaternion.
Mat3 random_rotation(Rng& rng);

}  // namespace ams

#endif
