#ifndef STEALTHY_RNG_HPP
#define STEALTHY_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace stealthy {

/// Counter-based random stream built on the splitmix64 finalizer.
///
/// A stream is keyed by (seed, stream ids); every draw is a pure function of
/// (key, counter), so ensembles indexed by (seed, sample, mode) can be
/// evaluated in any order or in parallel and always reproduce bit-identical
/// values.
class CounterStream {
public:
    static constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ull;

    static std::uint64_t mix(std::uint64_t z) {
        z += golden;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    explicit CounterStream(std::uint64_t seed) : key_(mix(seed ^ 0x5353544C4142ull)) {}

    /// Derive a sub-stream (e.g. per sample index or per restart).
    CounterStream fork(std::uint64_t id) const {
        CounterStream s(*this);
        s.key_ = mix(s.key_ ^ mix(id));
        return s;
    }

    std::uint64_t word(std::uint64_t counter) const { return mix(key_ ^ (counter * golden)); }

    /// Uniform in (0,1]; never returns 0 so log() is safe.
    double uniform01(std::uint64_t counter) const {
        return (static_cast<double>(word(counter) >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(std::uint64_t counter, double lo, double hi) const {
        double u = static_cast<double>(word(counter) >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

    /// Box-Muller pair of independent standard normals for draw `counter`.
    void normal_pair(std::uint64_t counter, double& z0, double& z1) const {
        const double u1 = uniform01(2 * counter);
        const double u2 = uniform01(2 * counter + 1);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        z0 = r * std::cos(t);
        z1 = r * std::sin(t);
    }

    double normal(std::uint64_t counter) const {
        double z0, z1;
        normal_pair(counter, z0, z1);
        return z0;
    }

private:
    std::uint64_t key_;
};

} // namespace stealthy

#endif
