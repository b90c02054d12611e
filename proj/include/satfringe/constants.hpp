#pragma once

#include <numbers>

namespace satfringe {

// SI defining constant.
inline constexpr double speed_of_light = 299792458.0; // m/s

// Geodetic values used by the synthetic pass generator.
inline constexpr double earth_gm     = 3.986004418e14; // m^3/s^2
inline constexpr double earth_radius = 6.371e6;        // m (mean)

inline constexpr double pi     = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

} // namespace satfringe
