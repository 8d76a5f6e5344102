#include "ams/spherical.hpp"

#include <cmath>

#include "ams/errors.hpp"

namespace ams {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

// Associated Legendre P_n^m(x) without the Condon-Shortley phase,
// P_n^m = (1-x^2)^{m/2} d^m/dx^m P_n(x).
double assoc_legendre(int n, int m, double x) {
  // P_m^m = (2m-1)!! (1-x^2)^{m/2}
  double pmm = 1.0;
  if (m > 0) {
    const double somx2 = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
    double fact = 1.0;
    for (int i = 0; i < m; ++i) {
      pmm *= fact * somx2;
      fact += 2.0;
    }
  }
  if (n == m) return pmm;
  double pmmp1 = x * (2.0 * m + 1.0) * pmm;
  if (n == m + 1) return pmmp1;
  double pnm = 0.0;
  for (int nn = m + 2; nn <= n; ++nn) {
    pnm = ((2.0 * nn - 1.0) * x * pmmp1 - (nn + m - 1.0) * pmm) / (nn - m);
    pmm = pmmp1;
    pmmp1 = pnm;
  }
  return pnm;
}

double sh_norm(int n, int m) {
  double fact = 1.0;
  for (int i = n - m + 1; i <= n + m; ++i) fact *= i;
  return std::sqrt((2.0 * n + 1.0) / (4.0 * kPi * fact));
}
}  // namespace

ShIndex ShIndex::from_flat(int flat) {
  const int n = static_cast<int>(std::sqrt(static_cast<double>(flat)));
  return ShIndex{n, flat - n * n - n};
}

double real_sph_harm(const ShIndex& idx, const AngularPosition& dir) {
  const int n = idx.n;
  const int m = idx.m;
  if (n < 0 || std::abs(m) > n) {
    throw ConfigError("real_sph_harm: invalid index (n=" + std::to_string(n) +
                      ", m=" + std::to_string(m) + ")");
  }
  const double ct = std::cos(dir.theta);
  const int am = std::abs(m);
  const double p = assoc_legendre(n, am, ct);
  const double k = sh_norm(n, am);
  if (m == 0) return k * p;
  const double sqrt2 = 1.4142135623730950488016887242097;
  if (m > 0) return sqrt2 * k * std::cos(m * dir.phi) * p;
  return sqrt2 * k * std::sin(am * dir.phi) * p;
}

void real_sph_harm_cartesian(int order, const Vec3& u, std::span<double> out) {
  if (order < 0 || order > 3) {
    throw ConfigError("real_sph_harm_cartesian: order must be in 0..3");
  }
  const int count = (order + 1) * (order + 1);
  if (static_cast<int>(out.size()) < count) {
    throw ConfigError("real_sph_harm_cartesian: output span too small");
  }
  const double x = u.x(), y = u.y(), z = u.z();
  out[0] = 0.28209479177387814;  // 1/(2 sqrt(pi))
  if (order == 0) return;
  const double c1 = 0.4886025119029199;  // sqrt(3/(4 pi))
  out[1] = c1 * y;
  out[2] = c1 * z;
  out[3] = c1 * x;
  if (order == 1) return;
  const double c2a = 1.0925484305920792;   // 0.5 sqrt(15/pi)
  const double c2b = 0.31539156525252005;  // 0.25 sqrt(5/pi)
  const double c2c = 0.5462742152960396;   // 0.25 sqrt(15/pi)
  out[4] = c2a * x * y;
  out[5] = c2a * y * z;
  out[6] = c2b * (3.0 * z * z - 1.0);
  out[7] = c2a * x * z;
  out[8] = c2c * (x * x - y * y);
  if (order == 2) return;
  const double c3a = 0.5900435899266435;  // 0.25 sqrt(35/(2 pi))
  const double c3b = 2.890611442640554;   // 0.5 sqrt(105/pi)
  const double c3c = 0.4570457994644658;  // 0.25 sqrt(21/(2 pi))
  const double c3d = 0.3731763325901154;  // 0.25 sqrt(7/pi)
  const double c3e = 1.445305721320277;   // 0.25 sqrt(105/pi)
  out[9] = c3a * y * (3.0 * x * x - y * y);
  out[10] = c3b * x * y * z;
  out[11] = c3c * y * (5.0 * z * z - 1.0);
  out[12] = c3d * z * (5.0 * z * z - 3.0);
  out[13] = c3c * x * (5.0 * z * z - 1.0);
  out[14] = c3e * z * (x * x - y * y);
  out[15] = c3a * x * (x * x - 3.0 * y * y);
}

AngularPosition to_angular(const Vec3& x_p, const Vec3& x_r) {
  const Vec3 d = x_p - x_r;
  const double r = d.norm();
  AngularPosition a;
  a.r = std::max(r, kMinPoleDistance);
  if (r < 1e-300) {
    a.theta = 0.0;
    a.phi = 0.0;
    return a;
  }
  a.theta = std::acos(std::clamp(d.z() / r, -1.0, 1.0));
  a.phi = std::atan2(d.y(), d.x());
  if (a.phi >= kPi) a.phi = -kPi;  // [-pi, pi)
  return a;
}

std::vector<Vec3> fibonacci_sphere(int count) {
  if (count < 1) throw ConfigError("fibonacci_sphere: count must be >= 1");
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> pts(count);
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * kPi * i * (1.0 - 1.0 / golden);
    pts[i] = Vec3(rho * std::cos(phi), rho * std::sin(phi), z);
  }
  return pts;
}

Mat3 random_rotation(Rng& rng) {
  double q[4];
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& qi : q) {
      qi = rng.normal();
      norm2 += qi * qi;
    }
  } while (norm2 < 1e-12);
  const double inv = 1.0 / std::sqrt(norm2);
  const double w = q[0] * inv, x = q[1] * inv, y = q[2] * inv, z = q[3] * inv;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

}  // namespace ams
