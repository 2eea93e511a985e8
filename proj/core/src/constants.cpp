#include "iondyne/constants.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "iondyne/constants_text.hpp"
#include "iondyne/error.hpp"

namespace iondyne {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view text, const std::string& key) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw InputError("constants: cannot parse value for '" + key + "'");
  }
  return value;
}

}  // namespace

PhysicalConstantsTable PhysicalConstantsTable::parse(std::string_view text) {
  PhysicalConstantsTable table;
  const std::map<std::string, double PhysicalConstantsTable::*, std::less<>> fields = {
      {"hbar", &PhysicalConstantsTable::hbar},
      {"vacuum_permittivity", &PhysicalConstantsTable::vacuum_permittivity},
      {"elementary_charge", &PhysicalConstantsTable::elementary_charge},
      {"bohr_radius", &PhysicalConstantsTable::bohr_radius},
      {"speed_of_light", &PhysicalConstantsTable::speed_of_light},
      {"lambda_ps", &PhysicalConstantsTable::lambda_ps},
  };
  std::map<std::string, bool, std::less<>> seen;

  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("constants: line " + std::to_string(line_no) + " lacks '='");
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto it = fields.find(key);
    if (it == fields.end()) throw InputError("constants: unknown key '" + key + "'");
    if (seen[key]) throw InputError("constants: duplicate key '" + key + "'");
    seen[key] = true;

    const double value = parse_number(trim(line.substr(eq + 1)), key);
    if (!(value > 0.0)) throw InputError("constants: '" + key + "' must be positive");
    table.*(it->second) = value;
  }

  for (const auto& [name, member] : fields) {
    if (!seen[name]) throw InputError("constants: missing key '" + name + "'");
  }
  return table;
}

PhysicalConstantsTable PhysicalConstantsTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("constants: cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

const PhysicalConstantsTable& PhysicalConstantsTable::shipped() {
  static const PhysicalConstantsTable table = parse(detail::kShippedConstantsText);
  return table;
}

PhysicalConstantsTable PhysicalConstantsTable::with_lambda_ps(double lambda_m) const {
  if (!(lambda_m > 0.0)) throw DomainError("lambda_ps must be positive");
  PhysicalConstantsTable copy = *this;
  copy.lambda_ps = lambda_m;
  return copy;
}

}  // namespace iondyne
