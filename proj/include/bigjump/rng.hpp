#pragma once

#include <cstdint>
#include <limits>

namespace bigjump {

// SplitMix64 step; used to derive well-separated seeds for worker streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    std::uint64_t s = root ^ (0xd1342543de82ef95ULL * (stream + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

// Seeded xoshiro256++ stream with a portable uniform-(0,1) transform: output
// depends on nothing but the seed, so replay is bit-identical across
// platforms, and the generator is cheap enough for rejection hot loops.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) { seed_state(seed); }
    RngStream(std::uint64_t root, std::uint64_t stream) { seed_state(derive_seed(root, stream)); }

    std::uint64_t next_u64() {
        std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on the open interval (0,1); never returns 0 or 1
    double unit_open() {
        for (;;) {
            double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    // uniform on (0,1], handy for tail-space inversion
    double unit_right_closed() { return 1.0 - static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // rejection to avoid modulo bias
        std::uint64_t lim = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r < lim) return r % n;
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    void seed_state(std::uint64_t seed) {
        for (auto& w : s_) w = splitmix64(seed);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9e3779b97f4a7c15ULL;
    }

    std::uint64_t s_[4];
};

}  // namespace bigjump
