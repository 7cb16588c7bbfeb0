#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace ressm::stats {

/// Philox4x32-10 block function (Salmon et al., SC'11). Pure: maps a
/// 128-bit counter and 64-bit key to 128 random bits.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// What a substream is used for. Part of the counter, so streams with
/// different purposes never overlap even for the same unit and iteration.
enum class StreamTag : std::uint32_t {
  kSegment = 1,
  kSubject = 2,
  kGroup = 3,
  kPopulation = 4,
  kVariance = 5,
  kInit = 6,
  kSimulator = 7,
  kReplicate = 8,
  kTest = 9,
};

/// Or-ed into a tag to separate the initialization chain's streams from
/// the main chain's.
inline constexpr std::uint32_t kStage1Bit = 0x100;

inline StreamTag stage_tag(StreamTag tag, bool stage1) {
  return static_cast<StreamTag>(static_cast<std::uint32_t>(tag) |
                                (stage1 ? kStage1Bit : 0u));
}

/// Identifies one substream: a master seed plus (tag, unit, iteration).
/// Draws for a given unit at a given iteration depend only on this key,
/// never on thread scheduling.
struct StreamKey {
  std::uint64_t seed = 0;
  StreamTag tag = StreamTag::kTest;
  std::uint32_t unit = 0;
  std::uint32_t iteration = 0;
};

/// Counter-based generator over one substream. Satisfies
/// UniformRandomBitGenerator with 64-bit output; the low counter word
/// advances per 128-bit block.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(const StreamKey& key);
  RngStream(std::uint64_t seed, StreamTag tag, std::uint32_t unit,
            std::uint32_t iteration)
      : RngStream(StreamKey{seed, tag, unit, iteration}) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

  double normal() { return normal_(*this); }
  double uniform() { return uniform_(*this); }
  /// Gamma with the given shape and scale (mean shape * scale).
  double gamma(double shape, double scale);
  double chi_square(double dof) { return gamma(0.5 * dof, 2.0); }

 private:
  void refill();

  PhiloxKey key_{};
  PhiloxCounter counter_{};
  PhiloxCounter block_{};
  int cursor_ = 4;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace ressm::stats
