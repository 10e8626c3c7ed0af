#pragma once

// Unit conventions used throughout the library:
//   lengths in um, energies in eV, charge in units of e, times in s,
//   angular frequencies in rad/s. Charging/Josephson energies are stored
//   as frequencies E/h in Hz. Deviations are flagged in the local name.

namespace qburst::units {

inline constexpr double planck_h = 6.62607015e-34;          // J s
inline constexpr double hbar = 1.0545718176461565e-34;      // J s
inline constexpr double electron_charge = 1.602176634e-19;  // C
inline constexpr double ev = 1.602176634e-19;               // J
inline constexpr double two_pi = 6.283185307179586;

inline constexpr double um_per_m = 1.0e6;

// E/h frequency (Hz) -> E/hbar angular frequency (rad/s)
inline constexpr double e_over_hbar(double freq_hz) { return two_pi * freq_hz; }

}  // namespace qburst::units
