#include "iondyne/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "iondyne/error.hpp"
#include "iondyne/units.hpp"

namespace iondyne {

const char* to_string(ScanKind kind) { return kind == ScanKind::flip ? "flip" : "echo"; }

void write_dataset(std::ostream& out, const ShotDataset& data) {
  data.validate();
  const auto& m = data.metadata;
  out << kDatasetHeader << '\n';
  out << "# seed=" << m.seed << '\n';
  out << "# detuning_label=" << m.detuning_label << '\n';
  out << "# kind=" << to_string(m.kind) << '\n';
  if (m.run) out << "# run=" << *m.run << '\n';
  if (m.block) out << "# block=" << *m.block << '\n';
  if (m.optical_frequency) {
    out << fmt::format("# wavemeter_hz={:.17g}\n", hz_from_angular(*m.optical_frequency));
  }
  for (const auto& [key, value] : m.extra) out << "# " << key << '=' << value << '\n';
  for (const auto& row : data.rows) {
    out << fmt::format("{:.8e},{},{},{}\n", row.duration, row.shots, row.dark_count,
                       to_string(row.initialization));
  }
}

std::string format_dataset(const ShotDataset& data) {
  std::ostringstream out;
  write_dataset(out, data);
  return out.str();
}

namespace {

template <typename T>
T parse_field(std::string_view text, std::size_t line_no, const char* what) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw InputError(fmt::format("dataset line {}: cannot parse {} '{}'", line_no, what, text));
  }
  return value;
}

}  // namespace

ShotDataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kDatasetHeader) {
    throw InputError("dataset: missing '# iondyne-dataset v1' header");
  }
  ShotDataset data;
  bool have_kind = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.starts_with("# ")) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      auto& m = data.metadata;
      if (key == "seed") {
        m.seed = parse_field<std::uint64_t>(value, line_no, "seed");
      } else if (key == "detuning_label") {
        m.detuning_label = value;
      } else if (key == "kind") {
        if (value != "flip" && value != "echo") {
          throw InputError(fmt::format("dataset line {}: unknown kind '{}'", line_no, value));
        }
        m.kind = value == "flip" ? ScanKind::flip : ScanKind::echo;
        have_kind = true;
      } else if (key == "run") {
        m.run = parse_field<int>(value, line_no, "run");
      } else if (key == "block") {
        m.block = parse_field<int>(value, line_no, "block");
      } else if (key == "wavemeter_hz") {
        m.optical_frequency = angular_from_hz(parse_field<double>(value, line_no, "wavemeter_hz"));
      } else {
        m.extra.emplace_back(key, value);
      }
      continue;
    }
    if (line.starts_with('#')) continue;

    std::string_view rest(line);
    std::string_view cols[4];
    for (int c = 0; c < 4; ++c) {
      const auto comma = rest.find(',');
      if ((c < 3) == (comma == std::string_view::npos)) {
        throw InputError(fmt::format("dataset line {}: expected 4 columns", line_no));
      }
      cols[c] = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    ShotRow row;
    row.duration = parse_field<double>(cols[0], line_no, "duration_s");
    row.shots = parse_field<long>(cols[1], line_no, "shots");
    row.dark_count = parse_field<long>(cols[2], line_no, "dark_count");
    row.initialization = initialization_from_string(std::string(cols[3]));
    data.rows.push_back(row);
  }
  if (!have_kind) throw InputError("dataset: metadata lacks 'kind'");
  data.validate();
  return data;
}

ShotDataset parse_dataset(const std::string& text) {
  std::istringstream in(text);
  return read_dataset(in);
}

ShotDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset " + path.string());
  try {
    return read_dataset(in);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace iondyne
