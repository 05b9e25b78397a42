#pragma once

// Shared fixtures and independent oracles for the unit tests.

#include "reach/dynamics.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace reach::test {

inline std::filesystem::path data_dir() { return REACH_DATA_DIR; }
inline std::filesystem::path scenario(const std::string& name) { return data_dir() / "scenarios" / (name + ".json"); }

inline std::filesystem::path scratch_dir(const std::string& name)
{
  auto p = std::filesystem::temp_directory_path() / ("reach_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Earth departure state (km, km/s) and the Earth-Mars vehicle.
inline StateVec earth_departure()
{
  Vec6 x;
  x << -140699693.0, -51614428.0, 980.0, 9.774596, -28.07828, 0.0004337725;
  return StateVec(x, Frame::HelioInertial);
}
inline SpacecraftParams earth_mars_vehicle() { return SpacecraftParams::make(0.5, 3000.0, 1000.0); }

inline StateVec l2_halo_state()
{
  Vec6 x;
  x << 1.17204419281306, 0, -0.0862093101977581, 0, -0.188009087163036, 0;
  return StateVec(x, Frame::SynodicRotating);
}
inline StateVec nrho_state()
{
  Vec6 x;
  x << 1.0221, 0, -0.1821, 0, -0.1033, 0;
  return StateVec(x, Frame::SynodicRotating);
}

inline Vec3 random_unit(std::mt19937_64& g)
{
  std::normal_distribution<double> n;
  Vec3 v(n(g), n(g), n(g));
  return v.normalized();
}

// Collinear L1 abscissa by bisection on the x-axis force balance.
inline double l1_by_bisection(double mu)
{
  auto f = [mu](double x) {
    const double d1 = x + mu;
    const double d2 = x - 1.0 + mu;
    return x - (1.0 - mu) * d1 / std::pow(std::abs(d1), 3) - mu * d2 / std::pow(std::abs(d2), 3);
  };
  double lo = 0.5, hi = 1.0 - mu - 1e-6;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Closed-form elliptic Kepler propagation (f and g functions).
inline Vec6 kepler_propagate(const Vec6& x0, double mu, double dt)
{
  const Vec3 r0 = x0.head<3>();
  const Vec3 v0 = x0.tail<3>();
  const double r0n = r0.norm();
  const double a = 1.0 / (2.0 / r0n - v0.squaredNorm() / mu);
  const double n = std::sqrt(mu / (a * a * a));
  const double ecosE0 = 1.0 - r0n / a;
  const double esinE0 = r0.dot(v0) / std::sqrt(mu * a);
  const double e = std::hypot(ecosE0, esinE0);
  const double e0 = std::atan2(esinE0, ecosE0);
  const double m = e0 - esinE0 + n * dt;
  double ea = m;
  for (int i = 0; i < 50; ++i) ea -= (ea - e * std::sin(ea) - m) / (1.0 - e * std::cos(ea));
  const double de = ea - e0;
  const double f = 1.0 - a / r0n * (1.0 - std::cos(de));
  const double g = dt - (de - std::sin(de)) / n;
  const Vec3 r = f * r0 + g * v0;
  const double rn = r.norm();
  const double fd = -std::sqrt(mu * a) / (rn * r0n) * std::sin(de);
  const double gd = 1.0 - a / rn * (1.0 - std::cos(de));
  Vec6 out;
  out << r, fd * r0 + gd * v0;
  return out;
}

}  // namespace reach::test
