#pragma once
#include <cstdint>
#include <initializer_list>

namespace locnet {

/// splitmix64 finalizer.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed as a pure function of a parent seed and a path of tags.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept
{
    std::uint64_t s = mix_seed(parent);
    for (auto tag : path) s = mix_seed(s ^ mix_seed(tag + 0x632be59bd9b4e019ULL));
    return s;
}

// Stream tags used when deriving per-purpose seeds.
namespace stream {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t activation = 2;
inline constexpr std::uint64_t inner = 3;
inline constexpr std::uint64_t noise = 4;
inline constexpr std::uint64_t network = 5;
} // namespace stream

} // namespace locnet
