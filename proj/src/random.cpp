#include "ressm/core/random.hpp"

namespace ressm::stats {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                    std::uint32_t& hi) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(product);
  hi = static_cast<std::uint32_t>(product >> 32);
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kPhiloxM0, c[0], lo0, hi0);
    mulhilo(kPhiloxM1, c[2], lo1, hi1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
  }
  return c;
}

RngStream::RngStream(const StreamKey& key) {
  key_ = {static_cast<std::uint32_t>(key.seed),
          static_cast<std::uint32_t>(key.seed >> 32)};
  counter_ = {0u, static_cast<std::uint32_t>(key.tag), key.unit,
              key.iteration};
}

void RngStream::refill() {
  block_ = philox4x32_10(counter_, key_);
  ++counter_[0];
  cursor_ = 0;
}

RngStream::result_type RngStream::operator()() {
  if (cursor_ > 2) refill();
  const std::uint64_t hi = block_[cursor_];
  const std::uint64_t lo = block_[cursor_ + 1];
  cursor_ += 2;
  return (hi << 32) | lo;
}

double RngStream::gamma(double shape, double scale) {
  std::gamma_distribution<double> dist(shape, scale);
  return dist(*this);
}

}  // namespace ressm::stats
