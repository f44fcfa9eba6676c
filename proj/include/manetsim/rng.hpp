#ifndef MANETSIM_RNG_HPP
#define MANETSIM_RNG_HPP

#include <cstdint>
#include <random>

namespace manet {

/// Seeded generator with hand-rolled uniform mappings. std:: distributions
/// are implementation-defined, which would break byte-identical replay
/// across toolchains, so only the raw engine output is used.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : m_gen(seed) {}

    std::uint64_t nextU64() { return m_gen(); }

    /// Uniform in [0,1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(m_gen() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t uniformInt(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(m_gen() % span);
    }

    /// splitmix64 step; used to derive independent substream seeds.
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t substream(std::uint64_t seed, std::uint64_t stream) {
        return mix(seed ^ mix(stream + 1));
    }

  private:
    std::mt19937_64 m_gen;
};

} // namespace manet

#endif
