#ifndef STEALTHY_STATISTICS_HPP
#define STEALTHY_STATISTICS_HPP

#include <span>
#include <vector>

#include "stealthy/gaussian_field.hpp"
#include "stealthy/points.hpp"
#include "stealthy/test_functions.hpp"

namespace stealthy {

struct CertificateMissingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Site coordinates mapped to the centered fundamental domain
/// [-box/2, box/2)^d, where the test functions live.
std::vector<double> centered_site(const TorusGeometry& g, std::size_t flat);
/// Same for a point of a configuration.
std::vector<double> centered_point(const PointConfiguration& cfg, std::size_t j);

/// I(phi) = cell_volume * sum_x phi(x) xi(x) over centered sites.
cdouble linear_statistic(const TestFunction& test, const FieldRealization& field);

/// I(phi) for a periodic point set. Wave-supported kinds are evaluated
/// through their periodization (a finite trigonometric polynomial over the
/// box modes inside the support), which realizes the sum of phi over all
/// periodic images exactly; other kinds sum phi over the stored points.
cdouble linear_statistic(const TestFunction& test, const PointConfiguration& cfg);

/// Box modes k = 2 pi j / box_length inside the test's wave support.
std::vector<std::vector<double>> support_box_modes(const TestFunction& test,
                                                   double box_length);

struct LinstatCertificate {
    cdouble value;        // I(phi), periodized
    double expected;      // rho * phi^(0)
    double tolerance;     // propagated from the configuration's energy certificate
    bool pass = false;
};

/// Zero-variance check on a certified stealthy configuration: |I(phi) - rho
/// phi^(0)| is bounded by box^-d * max|phi^| * sqrt(#support modes * E).
LinstatCertificate linstat_certificate(const TestFunction& test,
                                       const PointConfiguration& cfg);

/// Analytic variance of I(phi) under spectrum S: n^-d sum_k |phi^(k)|^2 S(k).
/// Uses the closed-form transform when the test has one, otherwise the
/// lattice transform of the sampled function (cell_volume * DFT).
double variance_of_linear_statistic(const TestFunction& test, const StructureFunction& S);
/// Same mode sum for an arbitrary real lattice function.
double variance_of_lattice_statistic(const std::vector<double>& phi_sites,
                                     const StructureFunction& S);
/// Sample variance of Re I(phi) over a field ensemble.
double empirical_variance(const TestFunction& test, std::span<const FieldRealization> fields);

struct AnticoncReport {
    std::size_t max_count = 0;
    double bound = 0.0;     // (psi^*psi^)(0) * rho * b^-d
    bool pass = false;
    double cube_side = 0.0; // a * b^-1
    double grid_pitch = 0.0;
    std::vector<double> worst_center;
};

/// Slides the side-(a/b) cube over a grid of pitch <= side/8 and compares the
/// max count against the anti-concentration bound. Requires a certificate whose gap
/// realizes ball radius >= b.
AnticoncReport anticoncentration_audit(const PointConfiguration& cfg, double b,
                                       const BumpPair& pair);

enum class HoleNorm { euclidean, linf };

struct HoleReport {
    double radius = 0.0;
    std::vector<double> center;
    HoleNorm norm = HoleNorm::euclidean;
    bool exact = false; // d = 1 is exact; d >= 2 is a grid lower bound
};

/// d = 1: exact largest circular gap. d >= 2: grid search (pitch
/// box/(8*grid_resolution)) for the largest empty L-inf cube half-side.
HoleReport find_largest_hole(const PointConfiguration& cfg, int grid_resolution = 16);

/// Re-verification predicate: no point lies strictly inside the hole.
bool hole_is_empty(const PointConfiguration& cfg, const HoleReport& hole);

struct HoleBoundReport {
    double r0 = 0.0;         // Euclidean hole-radius bound, = kappa / b
    double r0_linf = 0.0;    // L-inf version, R* * theta_side
    double kappa = 0.0;      // r0 * b (b-free by the chain)
    int R_star = 0;
    double theta_side = 0.0; // a * b^-1, the audit cube side
    double a = 0.0;
    double autocorr_at_zero = 0.0;
    double c_phi = 0.0;      // decay constant ||D^{d+1}(psi^*psi^)||_1 * b^-1
    double chain_value = 0.0; // C_psi a^{-d-1} T(R*), the value that dropped below 1
};

/// Reproduces the bounded-holes proof chain with the pair's quadrature
/// constants: smallest integer R with C_psi a^{-(d+1)} T(R) < 1, where T(R)
/// sums the exact annulus covering counts against the (R+j)^{-d-1} decay.
/// rho and b cancel, so r0 * b is a universal constant.
HoleBoundReport hole_bound(double b, int d, const BumpPair& pair);

struct VarianceDecayReport {
    std::vector<double> scales;
    std::vector<double> variances;
    double slope = 0.0;     // log-log least-squares slope
    double residual = 0.0;  // rms residual of the fit
    bool degenerate = false; // all variances at the numerical zero floor
};

/// Var[I(phi(./L))] via the analytic mode sum at each scale, with the
/// log-log slope fit. At least 3 increasing scales, all <= box/4.
VarianceDecayReport variance_decay_fit(const StructureFunction& S, const TestFunction& window,
                                       std::vector<double> scales);

} // namespace stealthy

#endif
