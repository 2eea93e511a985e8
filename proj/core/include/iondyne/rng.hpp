#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace iondyne {

/// Philox4x32-10 (Salmon et al., SC'11): a keyed bijection of a 128-bit
/// counter. Every random number is addressed by (key, counter), so the value
/// drawn for a given shot never depends on evaluation order or threading.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  [[nodiscard]] Counter operator()(Counter counter) const;

 private:
  Key key_;
};

/// What a stream is used for; occupies the highest counter word so the
/// purposes never collide.
enum class StreamPurpose : std::uint32_t {
  shot = 1,
  wavemeter = 2,
  mcmc = 3,
  jitter = 4,
};

/// Addressed stream: (seed, purpose, block, index). `block` identifies a
/// measurement block (or chain), `index` the duration point (or draw), and
/// the per-call `sub` the shot. Two independent streams differ in at least
/// one coordinate.
struct StreamAddress {
  std::uint64_t seed = 0;
  StreamPurpose purpose = StreamPurpose::shot;
  std::uint32_t block = 0;
  std::uint32_t index = 0;
};

/// Uniform double in [0, 1) built from 53 random bits of the Philox output
/// for counter (sub, index, block, purpose) under key `seed`.
[[nodiscard]] double uniform_at(const StreamAddress& address, std::uint32_t sub);

/// Sequential uniform generator over one addressed stream; satisfies
/// UniformRandomBitGenerator so it can feed <random> distributions.
class StreamEngine {
 public:
  using result_type = std::uint64_t;

  explicit StreamEngine(StreamAddress address) : address_(address), philox_(address.seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  /// Uniform in [0, 1).
  double uniform();
  /// Standard normal (Box-Muller, both variates used).
  double normal();

 private:
  StreamAddress address_;
  Philox4x32 philox_;
  std::uint32_t position_ = 0;  // low counter word
  std::uint32_t carry_ = 0;     // extends the counter past 2^32 draws
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace iondyne

namespace iondyne {

/// Independent 64-bit seed for sub-task `index` (e.g. one fit per run).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t index);

}  // namespace iondyne
