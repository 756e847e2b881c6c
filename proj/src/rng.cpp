#include "fsp/rng.hpp"

#include <cmath>

namespace fsp {

namespace {
inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
#if defined(__SIZEOF_INT128__)
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
#else
    // portable 32-bit split
    const std::uint64_t a_lo = a & 0xFFFFFFFFull, a_hi = a >> 32;
    const std::uint64_t b_lo = b & 0xFFFFFFFFull, b_hi = b >> 32;
    const std::uint64_t t = a_lo * b_lo;
    const std::uint64_t u = a_hi * b_lo + (t >> 32);
    const std::uint64_t v = a_lo * b_hi + (u & 0xFFFFFFFFull);
    hi = a_hi * b_hi + (u >> 32) + (v >> 32);
    lo = (v << 32) | (t & 0xFFFFFFFFull);
#endif
}
}  // namespace

void Philox2x64::block(std::uint64_t c0, std::uint64_t c1, std::uint64_t key,
                       std::uint64_t& r0, std::uint64_t& r1) {
    std::uint64_t x0 = c0, x1 = c1, k = key;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi, lo;
        mulhilo(kMul, x0, hi, lo);
        x0 = hi ^ k ^ x1;
        x1 = lo;
        k += kWeyl;
    }
    r0 = x0;
    r1 = x1;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint32_t stream, std::uint32_t sub)
    : seed_(seed),
      key_(splitmix64(seed)),
      hi_((static_cast<std::uint64_t>(stream) << 32) | sub) {}

RngStream RngStream::substream(std::uint32_t sub) const {
    RngStream s = *this;
    s.hi_ = (hi_ & 0xFFFFFFFF00000000ull) | sub;
    s.lo_ = 0;
    s.buf_ = 0;
    s.have_buf_ = false;
    return s;
}

std::uint64_t RngStream::next_u64() {
    if (have_buf_) {
        have_buf_ = false;
        return buf_;
    }
    std::uint64_t r0, r1;
    Philox2x64::block(hi_, lo_++, key_, r0, r1);
    buf_ = r1;
    have_buf_ = true;
    return r0;
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    // u1 in (0,1] so the log stays finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace fsp
