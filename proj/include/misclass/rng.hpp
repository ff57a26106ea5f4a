#ifndef MISCLASS_RNG_HPP
#define MISCLASS_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace misclass {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based stream (Philox4x32-10). A stream is fully determined by
// (seed, replicate, stream), so parallel work units draw identical numbers
// regardless of scheduling or execution order.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t replicate = 0, std::uint64_t stream = 0) {
        std::uint64_t s = 0x243F6A8885A308D3ULL ^ seed;
        const std::uint64_t k1 = detail::splitmix64(s);
        s ^= 0x13198A2E03707344ULL ^ replicate;
        const std::uint64_t k2 = detail::splitmix64(s);
        s ^= 0xA4093822299F31D0ULL ^ stream;
        const std::uint64_t k3 = detail::splitmix64(s);
        key_[0] = static_cast<std::uint32_t>(k1 ^ (k3 >> 32));
        key_[1] = static_cast<std::uint32_t>(k2 ^ k3);
    }

    std::uint32_t next_u32() {
        if (buf_pos_ >= 4) fill_block();
        return buf_[buf_pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // uniform on [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1); safe under log()
    double uniform_oo() { return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_oo()));
        const double t = 2.0 * std::numbers::pi * uniform_oo();
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    static std::pair<std::uint32_t, std::uint32_t> mulhilo(std::uint32_t a, std::uint32_t b) {
        const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
        return {static_cast<std::uint32_t>(prod >> 32), static_cast<std::uint32_t>(prod)};
    }

    void fill_block() {
        std::uint32_t c0 = counter_[0], c1 = counter_[1], c2 = counter_[2], c3 = counter_[3];
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            const auto [hi0, lo0] = mulhilo(0xD2511F53u, c0);
            const auto [hi1, lo1] = mulhilo(0xCD9E8D57u, c2);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        buf_ = {c0, c1, c2, c3};
        if (++counter_[0] == 0)
            if (++counter_[1] == 0)
                if (++counter_[2] == 0) ++counter_[3];
        buf_pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> counter_{0, 0, 0, 0};
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace misclass

#endif
