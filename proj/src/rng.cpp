#include "cbfsim/rng.hpp"

namespace cbfsim
{

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng RngStreams::stream(std::string_view name, std::uint64_t index) const
{
    // FNV-1a over the name, then mix with seed and index.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    const std::uint64_t a = mix64(master_seed_ ^ h);
    const std::uint64_t b = mix64(a ^ mix64(index + 1));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Rng{seq};
}

} // namespace cbfsim
