#ifndef STEALTHY_POINTS_HPP
#define STEALTHY_POINTS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stealthy/structure_function.hpp"

namespace stealthy {

/// Attached to configurations whose collective-coordinate energy on the gap
/// was driven below tolerance; downstream theorem checks condition on it.
struct StealthyCertificate {
    GapRegion gap;
    double final_energy = 0.0;
    double tolerance = 0.0; // the acceptance threshold that was met (tol * N^2)
    std::uint64_t iterations = 0;
    int restarts = 0;
};

/// Finite point set in the periodic box [0, box_length)^d.
struct PointConfiguration {
    int d = 1;
    double box_length = 1.0;
    std::vector<double> coords; // flat, point-major: x_0(0..d-1), x_1(...), ...
    std::optional<StealthyCertificate> certificate;

    std::size_t size() const { return coords.size() / static_cast<std::size_t>(d); }
    double rho() const;
    std::span<const double> point(std::size_t j) const {
        return {coords.data() + j * d, static_cast<std::size_t>(d)};
    }
    void wrap_into_box();
    PointConfiguration translated(std::span<const double> shift) const;
};

struct UndefinedEstimatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergenceError : std::runtime_error {
    double best_energy;
    NonConvergenceError(const std::string& what, double best)
        : std::runtime_error(what), best_energy(best) {}
};

/// rho~(k) = sum_j exp(-i k.x_j) for each requested wavevector.
std::vector<cdouble> collective_coordinates(const PointConfiguration& cfg,
                                            std::span<const std::vector<double>> wavevectors);

/// Single-configuration estimator S^_N(k) = |rho~(k)|^2 / N for k != 0,
/// normalized so an ideal-gas sample averages to 1.
std::vector<double> structure_factor(const PointConfiguration& cfg,
                                     std::span<const std::vector<double>> wavevectors);

/// Nonzero masked wavevectors of a gap, the modes entering the energy.
std::vector<std::vector<double>> nonzero_gap_wavevectors(const GapRegion& gap);

/// E = sum over nonzero masked modes of |rho~(k)|^2.
double collective_energy(const PointConfiguration& cfg, const GapRegion& gap);

/// E together with its analytic gradient dE/dx_j (closed-form trigonometric
/// sum); exposed so finite-difference checks can audit the minimizer.
double collective_energy_gradient(const PointConfiguration& cfg, const GapRegion& gap,
                                  std::vector<double>& grad);

struct GenerateOptions {
    double tolerance = 1e-12;     // certify when E <= tolerance * N^2
    std::uint64_t max_iterations = 20000; // per restart
    int max_restarts = 12;
};

/// Drives the collective-coordinate energy on the gap to zero from random
/// starts (L-BFGS with analytic gradient, restarts until tolerance).
/// `pinned` points, if given, are prepended and never moved, so callers can
/// build certified configurations around a planted inside set.
PointConfiguration generate_stealthy(std::size_t N, int d, double box_length,
                                     const GapRegion& gap, std::uint64_t seed,
                                     const GenerateOptions& opts = {},
                                     std::span<const double> pinned = {});

/// Integer lattice with i.i.d. uniform jitter in [-amplitude, amplitude] per
/// coordinate; amplitude 0 reproduces the exact lattice. A certificate is
/// attached only when the jittered set still meets the energy tolerance.
PointConfiguration perturbed_lattice(int d, int points_per_axis, double box_length,
                                     double amplitude, const GapRegion& gap,
                                     std::uint64_t seed);

} // namespace stealthy

#endif
