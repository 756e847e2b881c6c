#pragma once

#include <cstdint>

namespace fsp {

// Philox2x64-10 block function. Counter-based: the value at any (counter, key)
// is a pure function, so streams can be sliced per walker / per step without
// carrying generator state across threads.
struct Philox2x64 {
    static constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ull;
    static constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;

    static void block(std::uint64_t c0, std::uint64_t c1, std::uint64_t key,
                      std::uint64_t& r0, std::uint64_t& r1);
};

std::uint64_t splitmix64(std::uint64_t x);

// One logical random stream, addressed by (seed, stream, sub). Different
// addresses give statistically independent sequences; draws within a stream
// are sequential. Copying a stream copies its position.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint32_t stream = 0, std::uint32_t sub = 0);

    // Fresh stream with the same seed/stream id and a new sub-slot (used for
    // per-step draws so a redraw in one step never shifts later steps).
    RngStream substream(std::uint32_t sub) const;

    std::uint64_t next_u64();
    double uniform();   // [0, 1)
    double normal();    // standard normal, Box-Muller, two words per draw

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::uint64_t key_;
    std::uint64_t hi_;       // (stream << 32) | sub
    std::uint64_t lo_ = 0;   // block counter
    std::uint64_t buf_ = 0;
    bool have_buf_ = false;
};

}  // namespace fsp
