#include "wban/rng.hpp"

#include <stdexcept>

namespace wban {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng Rng::stream(std::uint64_t master_seed, std::uint64_t stream_id)
{
    return Rng{splitmix64(splitmix64(master_seed) ^ splitmix64(stream_id + 0x632be59bd9b4e019ULL))};
}

__extension__ typedef unsigned __int128 u128;

std::uint64_t Rng::uniform_below(std::uint64_t bound)
{
    if (bound == 0) {
        throw std::invalid_argument("uniform_below: bound must be positive");
    }
    // Lemire's nearly-divisionless rejection method.
    std::uint64_t x = engine_();
    u128 m = static_cast<u128>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            x = engine_();
            m = static_cast<u128>(x) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace wban
