#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "iondyne/mcmc.hpp"

// One fit result per file:
//
//   # iondyne-estimate v1
//   # key=value                      (kind, run, converged, ... )
//   param,median,ci68_lo,ci68_hi,rhat
//   r_plus,4981.2,4921.0,5040.7,1.0004
//
// Numbers are printed with 17 significant digits; a NaN rhat marks a
// least-squares (not sampled) parameter.

namespace iondyne {

inline constexpr const char* kEstimateHeader = "# iondyne-estimate v1";

struct EstimateRecord {
  std::vector<std::pair<std::string, std::string>> metadata;
  PosteriorEstimate estimate;  // samples are not stored

  [[nodiscard]] std::string meta(const std::string& key) const;
  [[nodiscard]] bool has_meta(const std::string& key) const;
};

void write_estimate(std::ostream& out, const EstimateRecord& record);
[[nodiscard]] EstimateRecord read_estimate(std::istream& in);
[[nodiscard]] EstimateRecord load_estimate(const std::filesystem::path& path);

}  // namespace iondyne
