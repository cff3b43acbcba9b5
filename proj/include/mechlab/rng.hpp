#ifndef MECHLAB_RNG_HPP
#define MECHLAB_RNG_HPP

#include <cstdint>
#include <stdexcept>

namespace mechlab {

namespace detail {
// splitmix64 finalizer (Steele, Lea, Flood); also used as the substream hash.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Deterministic counter-seeded random stream.
//
// Every source of randomness in the library flows through one master seed:
// harnesses derive a per-trial stream with substream(trial), and mechanisms
// derive per-agent streams with substream(agent).  Substream keys are hashes
// of (parent key, child id), so a draw never depends on how many draws some
// other substream consumed -- which is what makes results independent of
// worker count and safe to replay.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(detail::mix64(detail::mix64(seed) ^ detail::mix64(~stream))), state_(key_) {}

  // Child stream identified by `id`; independent of this stream's position.
  RngStream substream(std::uint64_t id) const {
    RngStream child(0);
    child.key_ = detail::mix64(key_ ^ detail::mix64(id * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
    child.state_ = child.key_;
    return child;
  }

  std::uint64_t next() { return detail::mix64(state_ += 0x9e3779b97f4a7c15ULL); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive; rejection keeps it exactly uniform.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(next());  // full 64-bit span
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range);
    std::uint64_t draw = next();
    while (draw >= limit) draw = next();
    return lo + static_cast<std::int64_t>(draw % range);
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t state_;
};

}  // namespace mechlab

#endif  // MECHLAB_RNG_HPP
