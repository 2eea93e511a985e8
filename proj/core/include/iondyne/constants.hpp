#pragma once

#include <filesystem>
#include <string_view>

namespace iondyne {

/// SI physical constants plus the S1/2 - P1/2 resonance wavelength.
///
/// Note on naming: `vacuum_permittivity` is the electric constant. The
/// pi-polarized light amplitude lives in `LaserField::eps_pi`; the two are
/// unrelated even though both are conventionally written with epsilon-zero.
struct PhysicalConstantsTable {
  double hbar = 0.0;                 // J s
  double vacuum_permittivity = 0.0;  // F/m
  double elementary_charge = 0.0;    // C
  double bohr_radius = 0.0;          // m
  double speed_of_light = 0.0;       // m/s
  double lambda_ps = 0.0;            // m

  /// Atomic unit of electric dipole moment e*a0 in C m.
  [[nodiscard]] double dipole_atomic_unit() const { return elementary_charge * bohr_radius; }

  /// The table shipped in core/data/constants.txt (compiled in).
  static const PhysicalConstantsTable& shipped();

  /// Parse `name = value # unit` lines. Every field must be present exactly
  /// once and strictly positive; unknown keys are rejected.
  static PhysicalConstantsTable parse(std::string_view text);
  static PhysicalConstantsTable load(const std::filesystem::path& path);

  /// Copy with a different resonance wavelength (metres).
  [[nodiscard]] PhysicalConstantsTable with_lambda_ps(double lambda_m) const;
};

}  // namespace iondyne
