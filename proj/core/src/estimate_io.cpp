#include "iondyne/estimate_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "iondyne/error.hpp"

namespace iondyne {

std::string EstimateRecord::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  throw InputError("estimate record lacks metadata '" + key + "'");
}

bool EstimateRecord::has_meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return true;
  }
  return false;
}

namespace {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

double parse_number(const std::string& text) {
  if (text == "nan") return std::nan("");
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw InputError("estimate: cannot parse '" + text + "'");
  return v;
}

}  // namespace

void write_estimate(std::ostream& out, const EstimateRecord& record) {
  out << kEstimateHeader << '\n';
  for (const auto& [k, v] : record.metadata) out << "# " << k << '=' << v << '\n';
  out << "param,median,ci68_lo,ci68_hi,rhat\n";
  for (const auto& p : record.estimate.parameters) {
    out << p.name << ',' << number(p.median) << ',' << number(p.ci68_lo) << ','
        << number(p.ci68_hi) << ',' << number(p.rhat) << '\n';
  }
}

EstimateRecord read_estimate(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kEstimateHeader) {
    throw InputError("estimate: missing '# iondyne-estimate v1' header");
  }
  EstimateRecord record;
  bool have_columns = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.starts_with("# ")) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        record.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      }
      continue;
    }
    if (!have_columns) {
      if (line != "param,median,ci68_lo,ci68_hi,rhat") {
        throw InputError("estimate: unexpected column header '" + line + "'");
      }
      have_columns = true;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() != 5) throw InputError("estimate: expected 5 columns in '" + line + "'");
    record.estimate.parameters.push_back({cols[0], parse_number(cols[1]), parse_number(cols[2]),
                                          parse_number(cols[3]), parse_number(cols[4])});
  }
  if (!have_columns) throw InputError("estimate: no parameter table");
  if (record.has_meta("converged")) record.estimate.converged = record.meta("converged") == "true";
  return record;
}

EstimateRecord load_estimate(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open estimate " + path.string());
  return read_estimate(in);
}

}  // namespace iondyne
