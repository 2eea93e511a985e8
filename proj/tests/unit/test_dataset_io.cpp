#include <doctest.h>

#include <sstream>

#include "iondyne/dataset_io.hpp"
#include "iondyne/error.hpp"
#include "iondyne/units.hpp"

using namespace iondyne;

namespace {
ShotDataset sample() {
  ShotDataset d;
  d.metadata.seed = 18446744073709551615ull;
  d.metadata.detuning_label = "red12";
  d.metadata.kind = ScanKind::flip;
  d.metadata.run = 3;
  d.metadata.block = 13;
  d.metadata.optical_frequency = angular_from_hz(755210674311790.25);
  d.rows = {{0.0, 500, 490, Initialization::up},
            {3.4e-5, 500, 401, Initialization::up},
            {1.23456789012e-3, 500, 17, Initialization::up}};
  return d;
}
}  // namespace

TEST_CASE("format is stable") {
  const std::string text = format_dataset(sample());
  CHECK(text.rfind("# iondyne-dataset v1\n", 0) == 0);
  CHECK(text.find("# seed=18446744073709551615\n") != std::string::npos);
  CHECK(text.find("# detuning_label=red12\n") != std::string::npos);
  CHECK(text.find("# kind=flip\n") != std::string::npos);
  CHECK(text.find("3.40000000e-05,500,401,up\n") != std::string::npos);
  // nine significant digits
  CHECK(text.find("1.23456789e-03,500,17,up\n") != std::string::npos);
}

TEST_CASE("round trip is bit-exact") {
  const std::string text = format_dataset(sample());
  const auto back = parse_dataset(text);
  CHECK(format_dataset(back) == text);
  CHECK(back.metadata.seed == sample().metadata.seed);
  CHECK(*back.metadata.run == 3);
  CHECK(*back.metadata.block == 13);
  CHECK(back.rows.size() == 3);
  CHECK(back.rows[2].dark_count == 17);
  CHECK(*back.metadata.optical_frequency ==
        doctest::Approx(*sample().metadata.optical_frequency).epsilon(1e-15));
}

TEST_CASE("unknown metadata keys survive") {
  std::string text = format_dataset(sample());
  const auto pos = text.find("0.00000000e+00");
  text.insert(pos, "# operator=night-shift\n");
  const auto back = parse_dataset(text);
  REQUIRE(back.metadata.extra.size() == 1);
  CHECK(back.metadata.extra[0].first == "operator");
  CHECK(format_dataset(back).find("# operator=night-shift\n") != std::string::npos);
}

TEST_CASE("malformed input is rejected") {
  CHECK_THROWS_AS((void)parse_dataset("1e-6,10,3,up\n"), InputError);
  const std::string head = "# iondyne-dataset v1\n# seed=1\n# detuning_label=x\n# kind=flip\n";
  CHECK_THROWS_AS((void)parse_dataset(head + "1e-6,10,11,up\n"), InputError);
  CHECK_THROWS_AS((void)parse_dataset(head + "1e-6,10,3,sideways\n"), InputError);
  CHECK_THROWS_AS((void)parse_dataset(head + "1e-6,10,3\n"), InputError);
  CHECK_THROWS_AS((void)parse_dataset(head + "abc,10,3,up\n"), InputError);
  CHECK_THROWS_AS((void)load_dataset("/nonexistent/file.dat"), InputError);
}
