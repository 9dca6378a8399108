#ifndef STEALTHY_STRUCTURE_FUNCTION_HPP
#define STEALTHY_STRUCTURE_FUNCTION_HPP

#include <optional>
#include <string>
#include <vector>

#include "stealthy/lattice.hpp"

namespace stealthy {

struct NotStealthyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class GapKind { ball_at_origin, shifted_cube, explicit_mask };

/// The spectral gap U realized as a set of wave-space modes (the discrete
/// U_n). Ball and cube gaps resolve deterministically from their continuum
/// description; explicit masks are validated for k -> -k closure, which real
/// processes require.
class GapRegion {
public:
    GapRegion() = default;

    static GapRegion ball_at_origin(const TorusGeometry& g, double radius);
    /// Cube of the given half-width centered at mu, together with its mirror
    /// image at -mu so the mask stays conjugate-closed.
    static GapRegion shifted_cube(const TorusGeometry& g, std::vector<double> mu,
                                  double half_width);
    static GapRegion explicit_mask(const TorusGeometry& g, std::vector<std::size_t> modes);
    static GapRegion empty(const TorusGeometry& g);

    const TorusGeometry& geometry() const { return geometry_; }
    GapKind kind() const { return kind_; }
    double ball_radius() const { return radius_; }
    const std::vector<double>& cube_center() const { return center_; }
    double cube_half_width() const { return half_width_; }

    /// Masked modes, sorted by flat index.
    const std::vector<std::size_t>& modes() const { return modes_; }
    bool contains(std::size_t flat) const { return member_[flat] != 0; }
    bool contains_origin() const { return !member_.empty() && member_[0] != 0; }
    bool empty_mask() const { return modes_.empty(); }

    std::string describe() const;

private:
    void finalize(bool check_symmetry);

    TorusGeometry geometry_;
    GapKind kind_ = GapKind::explicit_mask;
    double radius_ = 0.0;
    std::vector<double> center_;
    double half_width_ = 0.0;
    std::vector<std::size_t> modes_;
    std::vector<char> member_;
};

/// Nonnegative spectral density on the mode grid with a declared gap.
/// Invariants checked at construction: S >= 0, S == 0 exactly on the gap
/// mask, S(-k) == S(k).
struct StructureFunction {
    TorusGeometry geometry;
    std::vector<double> values; // per mode, storage order
    GapRegion gap;
    std::string family = "explicit";
    std::vector<double> params;

    static StructureFunction from_values(const TorusGeometry& g, std::vector<double> values,
                                         GapRegion gap, std::string family = "explicit",
                                         std::vector<double> params = {});

    /// 0 on |k| < b, 1 outside.
    static StructureFunction stealthy_flat(const TorusGeometry& g, double b);
    /// 0 on the cube pair at +/-mu, 1 outside (gap away from the origin).
    static StructureFunction gs_shifted_cube(const TorusGeometry& g, std::vector<double> mu,
                                             double half_width);
    /// exp(-1/|k|^p) below the cutoff kappa_c, constant exp(-1/kappa_c^p)
    /// beyond it; vanishes only at k = 0 but faster than any polynomial.
    static StructureFunction fast_decay(const TorusGeometry& g, double p, double kappa_c = 1.0);
    /// S(k) = |k|^2 up to the Nyquist scale: hyperuniform but not fast-decay
    /// (the negative control for the fast-decay theorems).
    static StructureFunction quadratic_hyperuniform(const TorusGeometry& g);
    /// 0 everywhere except the reciprocal-lattice (Bragg) modes of the
    /// integer lattice with q points per axis.
    static StructureFunction bragg_lattice(const TorusGeometry& g, int points_per_axis);

    double max_value() const;
};

/// Closed-form fast-decay profile S(|k|) = exp(-1/|k|^p), used both to build
/// the lattice family above and as the continuum reference in tests.
struct FastDecayProfile {
    double p = 1.0;
    double kappa_c = 1.0;
    double operator()(double knorm) const;
};

enum class ProcessClass { none, hyperuniform, stealthy, generalized_stealthy };

struct Classification {
    ProcessClass kind = ProcessClass::none;
    /// Set when the mask touches the Nyquist boundary of the discrete torus;
    /// the continuum theory does not cover that regime so we flag it.
    bool touches_nyquist = false;
};

const char* to_string(ProcessClass c);

Classification classify(const StructureFunction& S);

/// Largest b such that every mode with |k| < b is masked (supremum
/// convention: the smallest unmasked |k|; Nyquist radius pi*n/box_length when
/// everything is masked). Requires the gap to contain the origin.
double gap_radius(const StructureFunction& S);
double gap_radius(const GapRegion& gap);

struct ConstraintCount {
    std::size_t modes = 0;
    /// Real scalar constraints for a real-valued process: a +/-k pair gives
    /// two, a self-conjugate mode gives one. Equals `modes` for the
    /// conjugate-closed masks this module constructs.
    std::size_t real_constraints = 0;
};

ConstraintCount count_constraints(const GapRegion& gap);

} // namespace stealthy

#endif
