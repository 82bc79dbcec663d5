#include "retdecomp/rng.hpp"

#include <cmath>

namespace retdecomp {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng Rng::stream(std::uint64_t seed, std::string_view name)
{
    // FNV-1a over the name, mixed with the seed.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return Rng(splitmix64(splitmix64(seed) ^ h));
}

double Rng::gumbel()
{
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return -std::log(-std::log(u));
}

}  // namespace retdecomp
