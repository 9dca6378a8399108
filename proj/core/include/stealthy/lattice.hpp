#ifndef STEALTHY_LATTICE_HPP
#define STEALTHY_LATTICE_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace stealthy {

using cdouble = std::complex<double>;

/// Cubic periodic lattice Z^d_n embedded in the box [0, box_length)^d.
///
/// Sites are x = m * (box_length/n) for m in {0,..,n-1}^d. Wave-space modes
/// are k = 2*pi*j/box_length componentwise with signed index
/// j in {-floor(n/2),..,ceil(n/2)-1}. Storage order is lexicographic in the
/// per-axis storage index m = 0..n-1, where m represents j = m for
/// m < ceil(n/2) and j = m - n otherwise; mode 0 therefore comes first.
struct TorusGeometry {
    int d = 1;
    int n = 2;
    double box_length = 1.0;

    TorusGeometry() = default;
    TorusGeometry(int d_, int n_, double box_length_);

    std::size_t site_count() const;
    double lattice_spacing() const { return box_length / n; }

    /// Signed index of the per-axis storage slot m (m in [0,n)).
    int signed_index(int m) const { return m < (n + 1) / 2 ? m : m - n; }
    /// Storage slot of a signed per-axis index j (j in [-n/2, n/2)).
    int storage_index(int j) const { return j >= 0 ? j : j + n; }

    /// Decompose a flat index into per-axis storage indices (site or mode).
    std::vector<int> unflatten(std::size_t flat) const;
    std::size_t flatten(const std::vector<int>& m) const;

    /// Physical coordinates of the site with flat index `flat`.
    std::vector<double> site_position(std::size_t flat) const;
    /// Real wavevector of the mode with flat index `flat`.
    std::vector<double> wavevector(std::size_t flat) const;
    /// Euclidean norm of the wavevector of mode `flat`.
    double wavevector_norm(std::size_t flat) const;

    /// Flat index of the mode -k given the flat index of k.
    std::size_t negate_mode(std::size_t flat) const;
    /// True if the mode is its own negative (0 and Nyquist-type components).
    bool self_conjugate(std::size_t flat) const;

    bool operator==(const TorusGeometry& o) const {
        return d == o.d && n == o.n && box_length == o.box_length;
    }
};

enum class Space { physical, wave };

/// One complex scalar per site (physical) or per mode (wave), length n^d.
struct LatticeArray {
    TorusGeometry geometry;
    Space space = Space::physical;
    std::vector<cdouble> values;

    LatticeArray() = default;
    LatticeArray(TorusGeometry g, Space s)
        : geometry(g), space(s), values(g.site_count(), cdouble{0.0, 0.0}) {}
    LatticeArray(TorusGeometry g, Space s, std::vector<cdouble> v);
};

struct ModeEntry {
    std::size_t flat;       // storage position
    std::vector<int> index; // signed index j per axis
    std::vector<double> k;  // wavevector 2*pi*j/box_length
};

/// Deterministic enumeration of all n^d modes, mode 0 first.
std::vector<ModeEntry> mode_grid(const TorusGeometry& g);

/// Unnormalized forward transform: out(k) = sum_x in(x) exp(-i k.x).
LatticeArray forward_dft(const LatticeArray& a);

/// Inverse transform, carries 1/n^d: out(x) = n^-d sum_k in(k) exp(+i k.x).
LatticeArray inverse_dft(const LatticeArray& a);

} // namespace stealthy

#endif
