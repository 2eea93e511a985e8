#include "iondyne/ledger.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "iondyne/error.hpp"

namespace iondyne {

CorrectionLedger::CorrectionLedger(std::vector<CorrectionRow> rows) {
  for (auto& r : rows) add(std::move(r));
}

void CorrectionLedger::add(CorrectionRow row) {
  if (!(row.uncertainty >= 0.0)) {
    throw DomainError("ledger row '" + row.label + "' has a negative uncertainty");
  }
  if (!std::isfinite(row.shift)) throw DomainError("ledger row '" + row.label + "' shift");
  rows_.push_back(std::move(row));
}

double CorrectionLedger::total_shift() const {
  double total = 0.0;
  for (const auto& r : rows_) total += r.shift;
  return total;
}

double CorrectionLedger::total_uncertainty() const {
  double sum = 0.0;
  for (const auto& r : rows_) sum += r.uncertainty * r.uncertainty;
  return std::sqrt(sum);
}

namespace {

double parse_value(std::string_view text, std::size_t line_no) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InputError("ledger line " + std::to_string(line_no) + ": bad number '" +
                     std::string(text) + "'");
  }
  return v;
}

}  // namespace

CorrectionLedger CorrectionLedger::parse_csv(std::string_view text) {
  CorrectionLedger ledger;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != "label,shift_rel,unc_rel") {
        throw InputError("ledger: expected header 'label,shift_rel,unc_rel'");
      }
      header = true;
      continue;
    }
    // The label may itself contain commas; the numbers are the last two fields.
    const auto last = line.rfind(',');
    const auto middle = last == std::string::npos ? last : line.rfind(',', last - 1);
    if (middle == std::string::npos) {
      throw InputError("ledger line " + std::to_string(line_no) + ": expected 3 columns");
    }
    std::string_view view(line);
    ledger.add({line.substr(0, middle),
                parse_value(view.substr(middle + 1, last - middle - 1), line_no),
                parse_value(view.substr(last + 1), line_no)});
  }
  if (!header) throw InputError("ledger: missing header");
  return ledger;
}

CorrectionLedger CorrectionLedger::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open ledger " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

}  // namespace iondyne
