#include <doctest.h>

#include <cmath>
#include <set>

#include "iondyne/rng.hpp"
#include "oracles.hpp"

using namespace iondyne;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  for (const auto& v : oracle::kPhiloxVectors) {
    const std::uint64_t key = v.key[0] | (static_cast<std::uint64_t>(v.key[1]) << 32);
    const auto out = Philox4x32(key)(v.counter);
    CHECK(out == v.expected);
  }
}

TEST_CASE("addressed uniforms") {
  const StreamAddress a{42, StreamPurpose::shot, 3, 7};
  CHECK(uniform_at(a, 0) == uniform_at(a, 0));
  CHECK(uniform_at(a, 0) != uniform_at(a, 1));
  StreamAddress b = a;
  b.block = 4;
  CHECK(uniform_at(a, 0) != uniform_at(b, 0));
  b = a;
  b.purpose = StreamPurpose::mcmc;
  CHECK(uniform_at(a, 0) != uniform_at(b, 0));
  for (std::uint32_t i = 0; i < 1000; ++i) {
    const double u = uniform_at(a, i);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("stream engine moments") {
  StreamEngine engine({7, StreamPurpose::jitter, 0, 0});
  const int n = 200000;
  double su = 0, sn = 0, snn = 0;
  for (int i = 0; i < n; ++i) {
    su += engine.uniform();
    const double z = engine.normal();
    sn += z;
    snn += z * z;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(snn / n == doctest::Approx(1.0).epsilon(0.01));

  StreamEngine a({7, StreamPurpose::jitter, 0, 0});
  StreamEngine b({7, StreamPurpose::jitter, 0, 0});
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
}

TEST_CASE("derived seeds are distinct and reproducible") {
  std::set<std::uint64_t> seen;
  for (std::uint32_t i = 0; i < 1000; ++i) seen.insert(derive_seed(99, i));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(99, 5) == derive_seed(99, 5));
  CHECK(derive_seed(99, 5) != derive_seed(100, 5));
}
