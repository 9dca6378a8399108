#ifndef STEALTHY_RIGIDITY_HPP
#define STEALTHY_RIGIDITY_HPP

#include <span>
#include <vector>

#include "stealthy/gaussian_field.hpp"
#include "stealthy/points.hpp"
#include "stealthy/test_functions.hpp"

namespace stealthy {

struct RankDeficiencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PrecisionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Disjoint, exhaustive partition of the lattice: `inside` holds the site
/// flat indices of the erased window, everything else is outside.
struct WindowSplit {
    std::vector<std::size_t> inside;
};

struct FieldReconstruction {
    std::vector<double> inside_values; // in the order of split.inside
    double residual_norm = 0.0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    bool conditioning_warning = false; // sigma_min < 1e-10
};

/// Solves the gap-mode character constraints
///   sum_{x in D} xi(x) e^{-ik.x} = - sum_{x notin D} xi(x) e^{-ik.x},  k in U
/// by least squares for the inside values; only the outside entries of
/// `field` are read. The reconstruction is a deterministic function of
/// (outside values, gap mask).
FieldReconstruction reconstruct_field_inside(const FieldRealization& field,
                                             const GapRegion& gap, const WindowSplit& split);

/// F(Upsilon, theta) samples: the outside-computable combination
/// rho*phi^(0,theta,beta) - sum_outside phi(.,theta,beta)
/// extrapolated to beta -> 0, which equals the inside empirical
/// characteristic function sum_j exp(i <mu+theta, X_j>) up to the carried
/// error bar (image-sum truncation + extrapolation residual).
struct ECFSamples {
    std::vector<std::vector<double>> thetas;
    std::vector<cdouble> values;
    std::vector<double> error_bars;
    double beta0 = 0.0;
    double truncation_radius = 0.0;
};

struct EcfOptions {
    double beta0 = 0.02;
    double truncation_radius = 0.0;  // default: 32 * box_length
    double required_tolerance = 0.0; // 0 = accept any bar
    /// Final collective energy of the full certified configuration; enters
    /// the error bar of the exact masked-mode route.
    double certified_energy = 0.0;
};

/// `outside` must contain only the points outside the window; `rho` is the
/// full-process intensity entering the mean term rho * phi^(0, theta, beta).
/// Each theta must keep the sinc^2 support cube inside the gap.
///
/// When mu+theta lands on a masked torus mode (or 0), the identity
/// rho~(q) = 0 yields the inside ECF exactly as -sum_outside exp(i q.X) with
/// bar sqrt(E); for off-mode theta the continuum construction is emulated
/// (truncated image sums, beta-Richardson) and the carried bar grows with
/// the periodization tails it has to cover.
ECFSamples ecf_from_outside(const PointConfiguration& outside, double rho,
                            const GapRegion& gap, std::vector<double> mu,
                            const std::vector<std::vector<double>>& theta_grid,
                            const EcfOptions& opts = {});

struct PointRecovery {
    std::vector<std::vector<double>> positions; // sorted (lexicographically)
    double residual = 0.0;                      // max model-vs-sample deviation
    bool ill_posed_warning = false;             // near-coincident nodes detected
};

struct InversionFailureError : std::runtime_error {
    PointRecovery best;
    InversionFailureError(const std::string& what, PointRecovery b)
        : std::runtime_error(what), best(std::move(b)) {}
};

/// Recovers the N inside positions from exact or recovered ECF samples.
/// d = 1 uses a matrix pencil on a uniform theta grid; d = 2 peak-picks the
/// adjoint transform and polishes with Gauss-Newton.
PointRecovery invert_ecf_to_points(const ECFSamples& ecf, int N, int d,
                                   double residual_tolerance = 1e-6);

struct MomentRecovery {
    std::vector<std::vector<int>> indices;             // multi-indices [k]
    std::vector<double> scales;                        // the L sequence
    // per index, per L: ensemble median of |surrogate - direct inside moment|
    std::vector<std::vector<double>> median_abs_error;
    // per index, per L, per sample: surrogate value m^_[k](L)
    std::vector<std::vector<std::vector<double>>> surrogates;
};

/// Inside-moment recovery on centered Gaussian fields: the
/// surrogate -sum_{x notin D} x^[k] window(x/L) xi(x) converges to the inside
/// moment as L runs through the scale sequence when S decays fast at 0.
/// `window_sharpness` is passed to the monomial windows.
MomentRecovery recover_inside_moments(std::span<const FieldRealization> fields,
                                      const std::vector<double>& d_half_widths, int max_order,
                                      const std::vector<double>& scales,
                                      double window_sharpness = 1.0);

} // namespace stealthy

#endif
