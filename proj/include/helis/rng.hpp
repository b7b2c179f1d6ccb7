#pragma once

#include <cstdint>
#include <string_view>

namespace helis {

// splitmix64; self-contained so seeded draws are identical on every platform.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    int uniform_int(int a, int b) {  // inclusive
        return a + static_cast<int>(next() % static_cast<std::uint64_t>(b - a + 1));
    }

    // Stable sub-stream for a named check, independent of evaluation order.
    static Rng stream(std::uint64_t master, std::string_view tag) {
        std::uint64_t h = 1469598103934665603ull;
        for (char c : tag) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return Rng(master ^ h);
    }
};

}  // namespace helis
