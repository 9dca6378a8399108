#include "stealthy/test_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace stealthy {

namespace {

constexpr double pi = std::numbers::pi;

// Gauss-Legendre nodes/weights on [-1,1], Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> x, w;
    explicit GaussLegendre(int n) : x(n), w(n) {
        for (int i = 0; i < n; ++i) {
            double t = std::cos(pi * (i + 0.75) / (n + 0.5));
            double p0, p1, dp;
            for (int it = 0; it < 100; ++it) {
                p0 = 1.0; p1 = t;
                for (int j = 2; j <= n; ++j) {
                    const double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
                    p0 = p1; p1 = p2;
                }
                dp = n * (t * p1 - p0) / (t * t - 1.0);
                const double dt = p1 / dp;
                t -= dt;
                if (std::abs(dt) < 1e-15) break;
            }
            x[i] = t;
            w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
    }
};

const GaussLegendre& gl_rule(int n) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, GaussLegendre(n)).first;
    return it->second;
}

template <typename F>
double integrate(F&& f, double lo, double hi, int nodes) {
    const auto& gl = gl_rule(nodes);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (std::size_t i = 0; i < gl.x.size(); ++i) acc += gl.w[i] * f(mid + half * gl.x[i]);
    return acc * half;
}

// Raw mollifier profile, support [0,1/3).
double mollifier(double rho) {
    const double t = 3.0 * rho;
    if (!(t < 1.0)) return 0.0;
    return std::exp(-1.0 / (1.0 - t * t));
}

double sphere_area(int d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return 2.0 * pi;
        case 3: return 4.0 * pi;
        default: throw std::invalid_argument("dimension must be 1, 2 or 3");
    }
}

double two_pi_pow(int d) {
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= 2.0 * pi;
    return v;
}

// Angular kernel of the d-dimensional inverse transform of a radial function:
// (2pi)^-d * integral over S^{d-1} of exp(i rho r cos) reduces to these.
double radial_kernel(int d, double rho_r) {
    switch (d) {
        case 1: return std::cos(rho_r);
        case 2: return std::cyl_bessel_j(0.0, std::abs(rho_r));
        case 3: return rho_r == 0.0 ? 1.0 : std::sin(rho_r) / rho_r;
        default: throw std::invalid_argument("dimension must be 1, 2 or 3");
    }
}

int nodes_for_argument(double r, int base) {
    // the integrand oscillates ~ r/3 radians across the support; scale nodes
    const int extra = static_cast<int>(std::ceil(std::abs(r) / 3.0));
    return std::min(base + extra, 20000);
}

double sinc(double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; }

double triangle(double u) { return std::max(0.0, 1.0 - std::abs(u)); }

} // namespace

double smooth_window01(double t, double sharpness) {
    const double s = std::abs(t);
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    const auto f = [&](double v) { return v > 0.0 ? std::exp(-sharpness / v) : 0.0; };
    const double u = s - 1.0; // in (0,1)
    return f(1.0 - u) / (f(1.0 - u) + f(u));
}

double BumpPair::psi_hat_radial(double rho) const { return normalization * mollifier(rho); }

double BumpPair::psi_radial(double r) const {
    const int nodes = nodes_for_argument(r, quad_nodes);
    const double pref = sphere_area(d) / two_pi_pow(d);
    return pref * integrate(
                      [&](double rho) {
                          double rad = 1.0;
                          for (int i = 1; i < d; ++i) rad *= rho;
                          return psi_hat_radial(rho) * rad * radial_kernel(d, rho * r);
                      },
                      0.0, 1.0 / 3.0, nodes);
}

double BumpPair::psi(std::span<const double> x) const {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return psi_radial(std::sqrt(r2));
}

double BumpPair::autocorr_radial(double rho) const {
    rho = std::abs(rho);
    if (rho >= 2.0 / 3.0) return 0.0;
    if (d == 1) {
        // (1/2pi) int psi^(|u|) psi^(|rho-u|) du over the overlap
        const double lo = std::max(-1.0 / 3.0, rho - 1.0 / 3.0);
        const double hi = 1.0 / 3.0;
        return (1.0 / (2.0 * pi)) *
               integrate(
                   [&](double u) {
                       return psi_hat_radial(std::abs(u)) * psi_hat_radial(std::abs(rho - u));
                   },
                   lo, hi, quad_nodes);
    }
    // reduce over (s, angle): |rho e1 - eta|^2 = rho^2 + s^2 - 2 rho s cos
    const double norm = 1.0 / two_pi_pow(d);
    if (d == 2) {
        return norm * integrate(
                          [&](double s) {
                              const double inner = integrate(
                                  [&](double alpha) {
                                      const double t = std::sqrt(std::max(
                                          0.0, rho * rho + s * s - 2.0 * rho * s * std::cos(alpha)));
                                      return psi_hat_radial(t);
                                  },
                                  0.0, 2.0 * pi, quad_nodes);
                              return psi_hat_radial(s) * s * inner;
                          },
                          0.0, 1.0 / 3.0, quad_nodes);
    }
    // d == 3
    return norm * 2.0 * pi *
           integrate(
               [&](double s) {
                   const double inner = integrate(
                       [&](double alpha) {
                           const double t = std::sqrt(std::max(
                               0.0, rho * rho + s * s - 2.0 * rho * s * std::cos(alpha)));
                           return psi_hat_radial(t) * std::sin(alpha);
                       },
                       0.0, pi, quad_nodes);
                   return psi_hat_radial(s) * s * s * inner;
               },
               0.0, 1.0 / 3.0, quad_nodes);
}

BumpPair build_bump_pair(int d) {
    if (d < 1 || d > 3)
        throw ConstructionError("build_bump_pair: dimension must be 1, 2 or 3");
    BumpPair p;
    p.d = d;
    p.quad_nodes = 96;
    p.normalization = 1.0;

    const double pref = sphere_area(d) / two_pi_pow(d);
    const double raw_mass = pref * integrate(
                                       [&](double rho) {
                                           double rad = 1.0;
                                           for (int i = 1; i < d; ++i) rad *= rho;
                                           return mollifier(rho) * rad;
                                       },
                                       0.0, 1.0 / 3.0, p.quad_nodes);
    if (!(raw_mass > 0.0)) throw ConstructionError("build_bump_pair: mollifier mass not positive");

    // scale so psi(0) = 2: comfortably above the psi >= 1 requirement
    p.normalization = 2.0 / raw_mass;
    p.psi_at_zero = p.normalization * raw_mass;
    p.l1_autocorr = p.psi_at_zero * p.psi_at_zero;

    p.autocorr_at_zero =
        pref * integrate(
                   [&](double rho) {
                       double rad = 1.0;
                       for (int i = 1; i < d; ++i) rad *= rho;
                       const double v = p.psi_hat_radial(rho);
                       return v * v * rad;
                   },
                   0.0, 1.0 / 3.0, p.quad_nodes);

    // side a: scan the radial profile outward for the first dip below 1,
    // bisect the crossing, keep one scan step of margin, then convert the
    // certified radius to the cube side (corners sit at a*sqrt(d)/2).
    {
        const double step = 0.01;
        double r_prev = 0.0, v_prev = p.psi_radial(0.0);
        if (!(v_prev > 1.0))
            throw ConstructionError("build_bump_pair: psi(0) <= 1 after scaling");
        double r_cross = -1.0;
        for (double r = step; r < 60.0; r += step) {
            const double v = p.psi_radial(r);
            if (v < 1.0) {
                double lo = r_prev, hi = r;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (p.psi_radial(mid) >= 1.0 ? lo : hi) = mid;
                }
                r_cross = lo;
                break;
            }
            r_prev = r;
            v_prev = v;
        }
        if (r_cross <= step)
            throw ConstructionError("build_bump_pair: could not certify psi >= 1 on a cube");
        p.a = 2.0 * (r_cross - step) / std::sqrt(static_cast<double>(d));
    }

    // ||D^{d+1}(psi^*psi^)||_1 from the autocorrelation radial profile:
    // finite-difference the (d+1)-th derivative on a uniform grid (step
    // chosen per derivative order to balance truncation and round-off), then
    // integrate |.| with the normalized wave measure.
    {
        const double h = d == 1 ? 1.0 / 1024.0 : (d == 2 ? 1.0 / 512.0 : 1.0 / 256.0);
        const double hi = 2.0 / 3.0;
        const int M = static_cast<int>(std::ceil(hi / h)) + 8;
        p.profile_nodes = M;
        std::vector<double> gamma(M + 4, 0.0);
        for (int i = 0; i < M + 4; ++i) gamma[i] = p.autocorr_radial(i * h);
        auto at = [&](int i) { return gamma[static_cast<std::size_t>(std::abs(i))]; }; // even

        auto deriv = [&](int i) {
            switch (d + 1) {
                case 2:
                    return (-at(i - 2) + 16 * at(i - 1) - 30 * at(i) + 16 * at(i + 1) -
                            at(i + 2)) /
                           (12.0 * h * h);
                case 3:
                    return (-at(i - 3) + 8 * at(i - 2) - 13 * at(i - 1) + 13 * at(i + 1) -
                            8 * at(i + 2) + at(i + 3)) /
                           (8.0 * h * h * h);
                case 4:
                    return (-at(i - 3) + 12 * at(i - 2) - 39 * at(i - 1) + 56 * at(i) -
                            39 * at(i + 1) + 12 * at(i + 2) - at(i + 3)) /
                           (6.0 * h * h * h * h);
                default: throw ConstructionError("unsupported derivative order");
            }
        };

        // trapezoid of |gamma^(d+1)(rho)| rho^{d-1} over [0, 2/3]
        double acc = 0.0;
        const int Mi = static_cast<int>(std::ceil(hi / h));
        for (int i = 0; i <= Mi; ++i) {
            double rad = 1.0;
            const double rho = i * h;
            for (int j = 1; j < d; ++j) rad *= rho;
            const double v = std::abs(deriv(i)) * rad;
            acc += (i == 0 || i == Mi) ? 0.5 * v : v;
        }
        p.deriv_l1 = pref * acc * h;
    }

    return p;
}

const BumpPair& cached_bump_pair(int d) {
    static std::map<int, BumpPair> cache;
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(d);
    if (it == cache.end()) it = cache.emplace(d, build_bump_pair(d)).first;
    return it->second;
}

TestFunction TestFunction::anticonc(const BumpPair& pair, double b) {
    if (!(b > 0.0)) throw std::invalid_argument("anticonc: b must be positive");
    TestFunction t;
    t.kind_ = Kind::anticonc;
    t.d_ = pair.d;
    t.pair_ = pair;
    t.b_ = b;
    return t;
}

TestFunction TestFunction::rigidity_raw(std::vector<double> mu, std::vector<double> theta,
                                        double beta) {
    if (mu.size() != theta.size())
        throw std::invalid_argument("rigidity: mu/theta dimension mismatch");
    if (beta < 0.0) throw std::invalid_argument("rigidity: beta must be >= 0");
    TestFunction t;
    t.kind_ = Kind::rigidity;
    t.d_ = static_cast<int>(mu.size());
    t.mu_ = std::move(mu);
    t.theta_ = std::move(theta);
    t.beta_ = beta;
    return t;
}

TestFunction TestFunction::rigidity(const GapRegion& gap, std::vector<double> mu,
                                    std::vector<double> theta, double beta) {
    auto t = rigidity_raw(std::move(mu), std::move(theta), beta);
    if (gap.geometry().d != t.d_)
        throw std::invalid_argument("rigidity: gap dimension mismatch");
    const auto& g = gap.geometry();
    const double nyq = pi * g.n / g.box_length;
    for (int i = 0; i < t.d_; ++i) {
        const double c = t.mu_[i] + t.theta_[i];
        if (c - 2.0 * beta < -nyq || c + 2.0 * beta > nyq)
            throw SupportViolationError(
                "rigidity: support cube leaves the representable wave window");
    }
    for (std::size_t flat = 0; flat < g.site_count(); ++flat) {
        if (!t.wave_support_contains(g.wavevector(flat))) continue;
        if (!gap.contains(flat))
            throw SupportViolationError("rigidity: support cube escapes the gap mask");
    }
    return t;
}

TestFunction TestFunction::monomial_window(std::vector<int> multi_index, double L,
                                           std::vector<double> d_half_widths,
                                           double sharpness) {
    if (multi_index.size() != d_half_widths.size())
        throw std::invalid_argument("monomial_window: dimension mismatch");
    if (!(L >= 1.0)) throw std::invalid_argument("monomial_window: L must be >= 1");
    for (int k : multi_index)
        if (k < 0) throw std::invalid_argument("monomial_window: multi-index must be >= 0");
    for (double h : d_half_widths)
        if (!(h > 0.0)) throw std::invalid_argument("monomial_window: D must be a box of positive size");
    if (!(sharpness > 0.0))
        throw std::invalid_argument("monomial_window: sharpness must be positive");
    TestFunction t;
    t.kind_ = Kind::monomial_window;
    t.d_ = static_cast<int>(multi_index.size());
    t.multi_index_ = std::move(multi_index);
    t.scale_ = L;
    t.half_widths_ = std::move(d_half_widths);
    t.sharpness_ = sharpness;
    return t;
}

cdouble TestFunction::operator()(std::span<const double> x) const {
    switch (kind_) {
        case Kind::anticonc: {
            const double psix = pair_.psi_radial([&] {
                double r2 = 0.0;
                for (double v : x) r2 += (b_ * v) * (b_ * v);
                return std::sqrt(r2);
            }());
            double bd = 1.0;
            for (int i = 0; i < d_; ++i) bd *= b_;
            return cdouble(bd * psix * psix, 0.0);
        }
        case Kind::rigidity: {
            double phase = 0.0, amp = 1.0;
            for (int i = 0; i < d_; ++i) {
                phase += (mu_[i] + theta_[i]) * x[i];
                const double s = sinc(beta_ * x[i]);
                amp *= s * s;
            }
            return std::polar(amp, phase);
        }
        case Kind::monomial_window: {
            double v = 1.0;
            for (int i = 0; i < d_; ++i) {
                for (int kk = 0; kk < multi_index_[i]; ++kk) v *= x[i];
                v *= smooth_window01(x[i] / (scale_ * half_widths_[i]), sharpness_);
            }
            return cdouble(v, 0.0);
        }
    }
    return {};
}

cdouble TestFunction::wave(std::span<const double> xi) const {
    switch (kind_) {
        case Kind::anticonc: {
            double r2 = 0.0;
            for (double v : xi) r2 += v * v;
            return cdouble(pair_.autocorr_radial(std::sqrt(r2) / b_), 0.0);
        }
        case Kind::rigidity: {
            if (beta_ == 0.0)
                throw std::logic_error("rigidity: beta = 0 has no integrable transform");
            double v = 1.0;
            for (int i = 0; i < d_; ++i)
                v *= (pi / beta_) * triangle((xi[i] - mu_[i] - theta_[i]) / (2.0 * beta_));
            return cdouble(v, 0.0);
        }
        case Kind::monomial_window:
            throw std::logic_error("monomial_window: no closed-form transform");
    }
    return {};
}

double TestFunction::hat_at_zero() const {
    switch (kind_) {
        case Kind::anticonc: return pair_.autocorr_at_zero;
        case Kind::rigidity: {
            std::vector<double> zero(d_, 0.0);
            return wave(zero).real();
        }
        case Kind::monomial_window:
            throw std::logic_error("monomial_window: no closed-form transform");
    }
    return 0.0;
}

bool TestFunction::wave_support_contains(std::span<const double> xi) const {
    switch (kind_) {
        case Kind::anticonc: {
            double r2 = 0.0;
            for (double v : xi) r2 += v * v;
            return std::sqrt(r2) <= (2.0 / 3.0) * b_;
        }
        case Kind::rigidity: {
            for (int i = 0; i < d_; ++i)
                if (std::abs(xi[i] - mu_[i] - theta_[i]) > 2.0 * beta_) return false;
            return true;
        }
        case Kind::monomial_window: return true; // not compactly wave-supported
    }
    return false;
}

std::vector<double> TestFunction::wave_support_center() const {
    std::vector<double> c(d_, 0.0);
    if (kind_ == Kind::rigidity)
        for (int i = 0; i < d_; ++i) c[i] = mu_[i] + theta_[i];
    return c;
}

std::vector<double> TestFunction::wave_support_half_widths() const {
    switch (kind_) {
        case Kind::anticonc: return std::vector<double>(d_, (2.0 / 3.0) * b_);
        case Kind::rigidity: return std::vector<double>(d_, 2.0 * beta_);
        case Kind::monomial_window:
            return std::vector<double>(d_, std::numeric_limits<double>::infinity());
    }
    return {};
}

} // namespace stealthy
