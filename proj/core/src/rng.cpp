#include "iondyne/rng.hpp"

#include <cmath>

#include "iondyne/units.hpp"

namespace iondyne {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

double to_unit(std::uint32_t hi_word, std::uint32_t lo_word) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi_word) << 32) | lo_word;
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::operator()(Counter c) const {
  Key k = key_;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

double uniform_at(const StreamAddress& address, std::uint32_t sub) {
  const Philox4x32 philox(address.seed);
  const auto out = philox({sub, address.index, address.block,
                           static_cast<std::uint32_t>(address.purpose)});
  return to_unit(out[0], out[1]);
}

StreamEngine::result_type StreamEngine::operator()() {
  // The index word doubles as overflow for very long streams.
  const auto out = philox_({position_, address_.index + carry_, address_.block,
                            static_cast<std::uint32_t>(address_.purpose)});
  if (++position_ == 0) ++carry_;
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double StreamEngine::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double StreamEngine::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  spare_normal_ = radius * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return radius * std::cos(kTwoPi * u2);
}

}  // namespace iondyne

namespace iondyne {

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t index) {
  const auto out = Philox4x32(seed)({index, 0, 0, 0xfeedu});
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace iondyne
