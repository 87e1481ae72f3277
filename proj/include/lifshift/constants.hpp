#pragma once

namespace lifshift {
namespace constants {

// CODATA 2018 (hbar, k_B, eV are exact in the 2019 SI)
inline constexpr double hbar = 1.054571817e-34;    // J s
inline constexpr double c_light = 299792458.0;     // m / s
inline constexpr double k_boltzmann = 1.380649e-23;// J / K
inline constexpr double electron_volt = 1.602176634e-19; // J
inline constexpr double pi = 3.14159265358979323846;

// Photon energies are carried in eV on the optics side and converted to
// angular frequency only where SI quantities are assembled.
inline constexpr double ev_to_rad_s(double energy_ev)
{
  return energy_ev * electron_volt / hbar;
}

inline constexpr double rad_s_to_ev(double omega_rad_s)
{
  return omega_rad_s * hbar / electron_volt;
}

} // namespace constants
} // namespace lifshift
