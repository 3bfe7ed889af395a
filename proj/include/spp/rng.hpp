#ifndef SPP_RNG_HPP
#define SPP_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace spp {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Named stream derivation: every piece of randomness in the pipeline draws
// from stream_rng(seed, "<name>") so streams never alias across stages.
inline std::uint64_t stream_seed(std::uint64_t base, std::string_view name) {
    return splitmix64(base ^ fnv1a(name));
}

inline std::mt19937_64 stream_rng(std::uint64_t base, std::string_view name) {
    return std::mt19937_64(stream_seed(base, name));
}

// Uniform in [0,1). Avoids std::uniform_real_distribution so draws are
// identical across standard library implementations.
inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

// Fisher-Yates with a portable index draw.
template <typename Vec>
void shuffle(Vec& v, std::mt19937_64& g) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(g() % i);
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace spp

#endif
