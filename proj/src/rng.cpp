#include "covsel/rng.hpp"

#include <cmath>

namespace covsel::rng {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t state = seed;
    std::uint64_t base = splitmix64(state);
    state = base ^ (0xD1B54A32D192ED03ULL * (index + 1));
    return splitmix64(state);
}

std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a 64
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::mt19937_64 engine(std::uint64_t seed) {
    std::uint64_t state = seed;
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(state)),
                      static_cast<std::uint32_t>(splitmix64(state) >> 32),
                      static_cast<std::uint32_t>(splitmix64(state)),
                      static_cast<std::uint32_t>(splitmix64(state) >> 32)};
    return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& eng) {
    // Polar (Marsaglia) method; the paired variate is discarded so each
    // call consumes a self-contained block of the stream.
    for (;;) {
        double u = 2.0 * uniform01(eng) - 1.0;
        double v = 2.0 * uniform01(eng) - 1.0;
        double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

int uniform_int(std::mt19937_64& eng, int n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
        std::uint64_t x = eng();
        if (x < limit) return static_cast<int>(x % bound);
    }
}

std::vector<int> sample_with_replacement(std::mt19937_64& eng, int n) {
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = uniform_int(eng, n);
    return out;
}

std::vector<int> shuffled_indices(std::mt19937_64& eng, int n) {
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) {
        int j = uniform_int(eng, i + 1);
        std::swap(out[static_cast<std::size_t>(i)], out[static_cast<std::size_t>(j)]);
    }
    return out;
}

}  // namespace covsel::rng
