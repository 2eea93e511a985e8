#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace iondyne {

struct CorrectionRow {
  std::string label;
  double shift = 0.0;        // relative
  double uncertainty = 0.0;  // relative, >= 0
};

/// Relative corrections and uncertainties applied to the decay rate. Totals
/// are recomputed on demand: shifts add, uncertainties add in quadrature.
class CorrectionLedger {
 public:
  CorrectionLedger() = default;
  explicit CorrectionLedger(std::vector<CorrectionRow> rows);

  void add(CorrectionRow row);
  [[nodiscard]] const std::vector<CorrectionRow>& rows() const { return rows_; }
  [[nodiscard]] bool empty() const { return rows_.empty(); }
  [[nodiscard]] double total_shift() const;
  [[nodiscard]] double total_uncertainty() const;

  /// CSV with header `label,shift_rel,unc_rel`; '#' starts a comment line.
  static CorrectionLedger parse_csv(std::string_view text);
  static CorrectionLedger load_csv(const std::filesystem::path& path);

 private:
  std::vector<CorrectionRow> rows_;
};

}  // namespace iondyne
