#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace qcp {

/// SplitMix64 finalizer.
constexpr auto mix64(std::uint64_t z) noexcept -> std::uint64_t
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for item `index` of a batch driven by `master`. `stream` separates
/// independent uses of the same (master, index) pair, e.g. instance
/// generation versus solving.
constexpr auto derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream = 0) noexcept
    -> std::uint64_t
{
    return mix64(master ^ mix64(index ^ mix64(stream + 0x5851f42d4c957f2dULL)));
}

/// Seeded generator with platform-independent bounded draws. The standard
/// distributions are implementation-defined, which would break
/// reproducibility of recorded runs across toolchains.
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    auto next() -> std::uint64_t { return engine_(); }

    /// Uniform integer in [0, bound). bound must be positive.
    auto below(std::uint64_t bound) -> std::uint64_t
    {
        const std::uint64_t limit = -bound % bound; // 2^64 mod bound
        for (;;) {
            std::uint64_t r = engine_();
            if (r >= limit)
                return r % bound;
        }
    }

    /// Uniform double in [0, 1).
    auto unit() -> double { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    template <typename T>
    auto shuffle(std::span<T> items) -> void
    {
        for (std::size_t i = items.size(); i > 1; --i)
            std::swap(items[i - 1], items[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace qcp
