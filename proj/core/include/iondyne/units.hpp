#pragma once

#include <numbers>

// All frequencies are angular (rad/s) inside the library. Ordinary
// frequencies (Hz, MHz, GHz, THz) appear only at file and config boundaries
// and are converted here.

namespace iondyne {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double angular_from_hz(double hz) { return kTwoPi * hz; }
constexpr double hz_from_angular(double omega) { return omega / kTwoPi; }

constexpr double angular_from_mhz(double mhz) { return kTwoPi * mhz * 1e6; }
constexpr double mhz_from_angular(double omega) { return omega / kTwoPi * 1e-6; }

constexpr double angular_from_ghz(double ghz) { return kTwoPi * ghz * 1e9; }
constexpr double ghz_from_angular(double omega) { return omega / kTwoPi * 1e-9; }

constexpr double angular_from_thz(double thz) { return kTwoPi * thz * 1e12; }
constexpr double thz_from_angular(double omega) { return omega / kTwoPi * 1e-12; }

constexpr double seconds_from_us(double us) { return us * 1e-6; }
constexpr double seconds_from_ns(double ns) { return ns * 1e-9; }

}  // namespace iondyne
