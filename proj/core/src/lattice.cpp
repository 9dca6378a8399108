#include "stealthy/lattice.hpp"

#include <cmath>
#include <numbers>

namespace stealthy {

TorusGeometry::TorusGeometry(int d_, int n_, double box_length_)
    : d(d_), n(n_), box_length(box_length_) {
    if (d < 1) throw std::invalid_argument("TorusGeometry: d must be >= 1");
    if (n < 2) throw std::invalid_argument("TorusGeometry: n must be >= 2");
    if (!(box_length > 0.0))
        throw std::invalid_argument("TorusGeometry: box_length must be positive");
}

std::size_t TorusGeometry::site_count() const {
    std::size_t c = 1;
    for (int i = 0; i < d; ++i) c *= static_cast<std::size_t>(n);
    return c;
}

std::vector<int> TorusGeometry::unflatten(std::size_t flat) const {
    std::vector<int> m(d);
    for (int axis = d - 1; axis >= 0; --axis) {
        m[axis] = static_cast<int>(flat % n);
        flat /= n;
    }
    return m;
}

std::size_t TorusGeometry::flatten(const std::vector<int>& m) const {
    std::size_t flat = 0;
    for (int axis = 0; axis < d; ++axis) {
        int v = m[axis] % n;
        if (v < 0) v += n;
        flat = flat * n + static_cast<std::size_t>(v);
    }
    return flat;
}

std::vector<double> TorusGeometry::site_position(std::size_t flat) const {
    auto m = unflatten(flat);
    std::vector<double> x(d);
    const double h = lattice_spacing();
    for (int i = 0; i < d; ++i) x[i] = m[i] * h;
    return x;
}

std::vector<double> TorusGeometry::wavevector(std::size_t flat) const {
    auto m = unflatten(flat);
    std::vector<double> k(d);
    const double base = 2.0 * std::numbers::pi / box_length;
    for (int i = 0; i < d; ++i) k[i] = base * signed_index(m[i]);
    return k;
}

double TorusGeometry::wavevector_norm(std::size_t flat) const {
    auto k = wavevector(flat);
    double s = 0.0;
    for (double v : k) s += v * v;
    return std::sqrt(s);
}

std::size_t TorusGeometry::negate_mode(std::size_t flat) const {
    auto m = unflatten(flat);
    for (int i = 0; i < d; ++i) m[i] = (n - m[i]) % n;
    return flatten(m);
}

bool TorusGeometry::self_conjugate(std::size_t flat) const {
    auto m = unflatten(flat);
    for (int i = 0; i < d; ++i)
        if ((2 * m[i]) % n != 0) return false;
    return true;
}

LatticeArray::LatticeArray(TorusGeometry g, Space s, std::vector<cdouble> v)
    : geometry(g), space(s), values(std::move(v)) {
    if (values.size() != geometry.site_count())
        throw std::invalid_argument("LatticeArray: value count does not match geometry");
}

std::vector<ModeEntry> mode_grid(const TorusGeometry& g) {
    std::vector<ModeEntry> out;
    out.reserve(g.site_count());
    for (std::size_t flat = 0; flat < g.site_count(); ++flat) {
        ModeEntry e;
        e.flat = flat;
        auto m = g.unflatten(flat);
        e.index.resize(g.d);
        for (int i = 0; i < g.d; ++i) e.index[i] = g.signed_index(m[i]);
        e.k = g.wavevector(flat);
        out.push_back(std::move(e));
    }
    return out;
}

namespace {

// Exact twiddle table: w[r] = exp(-2*pi*i*r/n), so the character
// exp(-i k.x) = w[(j*m) mod n] with no accumulated angle error.
std::vector<cdouble> twiddle_table(int n) {
    std::vector<cdouble> w(n);
    for (int r = 0; r < n; ++r)
        w[r] = std::polar(1.0, -2.0 * std::numbers::pi * r / n);
    return w;
}

// One 1D pass of length n applied along `axis` of a d-dimensional array.
// sign=+1 applies conj(w), used by the inverse.
void axis_pass(std::vector<cdouble>& data, const TorusGeometry& g, int axis,
               const std::vector<cdouble>& w, int sign) {
    const int n = g.n;
    std::size_t stride = 1;
    for (int a = g.d - 1; a > axis; --a) stride *= n;
    const std::size_t block = stride * n;
    const std::size_t total = data.size();

    std::vector<cdouble> line(n), out(n);
    for (std::size_t base = 0; base < total; base += block) {
        for (std::size_t off = 0; off < stride; ++off) {
            for (int m = 0; m < n; ++m) line[m] = data[base + off + m * stride];
            for (int j = 0; j < n; ++j) {
                cdouble acc{0.0, 0.0};
                for (int m = 0; m < n; ++m) {
                    int r = static_cast<int>((static_cast<long long>(j) * m) % n);
                    cdouble c = w[r];
                    if (sign > 0) c = std::conj(c);
                    acc += line[m] * c;
                }
                out[j] = acc;
            }
            for (int j = 0; j < n; ++j) data[base + off + j * stride] = out[j];
        }
    }
}

} // namespace

LatticeArray forward_dft(const LatticeArray& a) {
    if (a.values.size() != a.geometry.site_count())
        throw std::invalid_argument("forward_dft: array size does not match geometry");
    LatticeArray out(a.geometry, Space::wave, a.values);
    auto w = twiddle_table(a.geometry.n);
    for (int axis = 0; axis < a.geometry.d; ++axis)
        axis_pass(out.values, a.geometry, axis, w, -1);
    return out;
}

LatticeArray inverse_dft(const LatticeArray& a) {
    if (a.values.size() != a.geometry.site_count())
        throw std::invalid_argument("inverse_dft: array size does not match geometry");
    LatticeArray out(a.geometry, Space::physical, a.values);
    auto w = twiddle_table(a.geometry.n);
    for (int axis = 0; axis < a.geometry.d; ++axis)
        axis_pass(out.values, a.geometry, axis, w, +1);
    const double scale = 1.0 / static_cast<double>(a.geometry.site_count());
    for (auto& v : out.values) v *= scale;
    return out;
}

} // namespace stealthy
