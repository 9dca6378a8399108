#ifndef STEALTHY_GAUSSIAN_FIELD_HPP
#define STEALTHY_GAUSSIAN_FIELD_HPP

#include <cstdint>
#include <span>

#include "stealthy/structure_function.hpp"

namespace stealthy {

struct GaussianSpec {
    StructureFunction S;
    std::uint64_t seed = 0;
};

/// One sample of the real Gaussian field on Z^d_n with spectrum S.
///
/// Sampling is spectral: xi(x) = n^{-d/2} sum_k sqrt(S(k)) g_k exp(i k.x)
/// with unit complex Gaussians g_k, g_{-k} = conj(g_k), and real g_k on
/// self-conjugate modes. A joint density on R^{n^d} does not exist when S
/// vanishes anywhere (the covariance is singular), so the spectral route is
/// the only constructive one. Under this module's DFT convention the spectral
/// amplitude n^{-d/2} forward_dft(values) has second moment exactly S(k).
struct FieldRealization {
    TorusGeometry geometry;
    std::vector<double> values; // per site, storage order
    std::uint64_t seed = 0;
    std::uint64_t index = 0;

    /// n^{-d/2} * forward_dft(values): the amplitude whose |.|^2 averages to S.
    LatticeArray spectral_amplitude() const;
};

FieldRealization sample_one(const GaussianSpec& spec, std::uint64_t index);
std::vector<FieldRealization> sample_field(const GaussianSpec& spec, std::size_t count,
                                           std::uint64_t first_index = 0);

/// C(r) = n^-d sum_k S(k) exp(i k.r), indexed by displacement site index.
std::vector<double> covariance(const GaussianSpec& spec);

struct DegeneracyReport {
    std::size_t constraints = 0;   // real scalar constraints from the gap
    std::size_t free_dims = 0;     // n^d - constraints
    std::size_t empirical_rank = 0;
    std::size_t samples = 0;
    double rank_tolerance = 1e-8;  // relative to the top singular value
};

/// Counts the gap constraints and checks them against the numerical rank of
/// the Monte Carlo covariance of `samples` fields.
DegeneracyReport degeneracy_rank(const GaussianSpec& spec, std::size_t samples = 0);

} // namespace stealthy

#endif
