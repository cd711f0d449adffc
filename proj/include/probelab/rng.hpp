#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace probelab {

/// SplitMix64 finalizer. Used as the keyed hash behind every random tape.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept
{
    return mix64(seed ^ mix64(value + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t hash_words(std::uint64_t seed, std::initializer_list<std::uint64_t> words) noexcept
{
    std::uint64_t h = mix64(seed);
    for (auto w : words)
        h = hash_combine(h, w);
    return h;
}

/// Lazily indexed pseudorandom stream. Word i is a pure function of (key, i),
/// so any prefix can be regenerated without storing state.
class RandomTape {
public:
    RandomTape() = default;
    explicit RandomTape(std::uint64_t key) : key_(key) {}

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t word(std::uint64_t index) const noexcept { return hash_combine(key_, index); }
    bool bit(std::uint64_t index) const noexcept { return (word(index >> 6) >> (index & 63)) & 1U; }

    /// Uniform integer in [0, bound) drawn from word `index` (bound > 0).
    std::uint64_t uniform(std::uint64_t index, std::uint64_t bound) const noexcept
    {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(word(index)) * bound) >> 64);
    }

    /// Uniform double in [0, 1).
    double unit(std::uint64_t index) const noexcept { return static_cast<double>(word(index) >> 11) * 0x1.0p-53; }

    std::vector<bool> prefix(std::size_t nbits) const
    {
        std::vector<bool> out(nbits);
        for (std::size_t i = 0; i < nbits; ++i)
            out[i] = bit(i);
        return out;
    }

    /// Digest reported alongside probe answers.
    std::uint64_t digest() const noexcept { return word(0); }

private:
    std::uint64_t key_ = 0;
};

} // namespace probelab
