#ifndef SQZ_RNG_HPP
#define SQZ_RNG_HPP

// Counter-style generator: the n-th output is splitmix64's finalizer applied to
// seed + n * golden-gamma. Any output can be recomputed from (seed, n), which is
// what lets traces be generated in any order or on any thread.

#include <boost/random/normal_distribution.hpp>

#include <cstdint>

namespace sqz
{

inline constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Per-stream seed derived from a master seed and a stream index.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    return mix64(master ^ mix64(index + golden_gamma));
}

class CounterRng
{
public:
    /// Written into trace headers (format version 1 implies this generator).
    static constexpr const char *identity = "splitmix64-counter/boost-ziggurat";

    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    result_type operator()() { return next_u64(); }

    std::uint64_t next_u64() { return mix64(seed_ + (++counter_) * golden_gamma); }

    /// Uniform on (0, 1].
    double uniform_open0()
    {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal (Boost's ziggurat; stateless, so output depends only on the counter).
    double normal() { return boost::random::normal_distribution<double>{}(*this); }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

} // namespace sqz

#endif // SQZ_RNG_HPP
