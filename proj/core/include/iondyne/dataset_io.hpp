#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "iondyne/simulator.hpp"

// Text format, one dataset per file:
//
//   # iondyne-dataset v1
//   # key=value            (seed, detuning_label, kind, run, block, wavemeter_hz)
//   duration_s,shots,dark_count,init
//   ...
//
// Rows carry no column header. Durations are printed in scientific notation
// with 9 significant digits; init is one of up, down, echo.

namespace iondyne {

inline constexpr const char* kDatasetHeader = "# iondyne-dataset v1";

void write_dataset(std::ostream& out, const ShotDataset& data);
[[nodiscard]] std::string format_dataset(const ShotDataset& data);
[[nodiscard]] ShotDataset read_dataset(std::istream& in);
[[nodiscard]] ShotDataset parse_dataset(const std::string& text);
[[nodiscard]] ShotDataset load_dataset(const std::filesystem::path& path);

[[nodiscard]] const char* to_string(ScanKind kind);

}  // namespace iondyne
