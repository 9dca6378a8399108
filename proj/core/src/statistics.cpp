#include "stealthy/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace stealthy {

namespace {
constexpr double pi = std::numbers::pi;

double box_volume(int d, double box_length) {
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= box_length;
    return v;
}
} // namespace

std::vector<double> centered_site(const TorusGeometry& g, std::size_t flat) {
    auto x = g.site_position(flat);
    for (double& c : x)
        if (c >= 0.5 * g.box_length) c -= g.box_length;
    return x;
}

std::vector<double> centered_point(const PointConfiguration& cfg, std::size_t j) {
    std::vector<double> x(cfg.point(j).begin(), cfg.point(j).end());
    for (double& c : x) {
        c = std::fmod(c, cfg.box_length);
        if (c < 0.0) c += cfg.box_length;
        if (c >= 0.5 * cfg.box_length) c -= cfg.box_length;
    }
    return x;
}

cdouble linear_statistic(const TestFunction& test, const FieldRealization& field) {
    const auto& g = field.geometry;
    if (test.dim() != g.d)
        throw std::invalid_argument("linear_statistic: dimension mismatch");
    const double cell = std::pow(g.lattice_spacing(), g.d);
    cdouble acc{0.0, 0.0};
    for (std::size_t flat = 0; flat < g.site_count(); ++flat)
        acc += test(centered_site(g, flat)) * field.values[flat];
    return acc * cell;
}

std::vector<std::vector<double>> support_box_modes(const TestFunction& test,
                                                   double box_length) {
    const int d = test.dim();
    const auto center = test.wave_support_center();
    const auto half = test.wave_support_half_widths();
    const double base = 2.0 * pi / box_length;
    std::vector<int> lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
        lo[i] = static_cast<int>(std::ceil((center[i] - half[i]) / base - 1e-12));
        hi[i] = static_cast<int>(std::floor((center[i] + half[i]) / base + 1e-12));
    }
    std::vector<std::vector<double>> modes;
    std::vector<int> idx(lo);
    while (true) {
        std::vector<double> k(d);
        for (int i = 0; i < d; ++i) k[i] = base * idx[i];
        if (test.wave_support_contains(k)) modes.push_back(k);
        int axis = d - 1;
        while (axis >= 0) {
            if (++idx[axis] <= hi[axis]) break;
            idx[axis] = lo[axis];
            --axis;
        }
        if (axis < 0) break;
    }
    return modes;
}

cdouble linear_statistic(const TestFunction& test, const PointConfiguration& cfg) {
    if (test.dim() != cfg.d)
        throw std::invalid_argument("linear_statistic: dimension mismatch");
    if (!test.has_wave_closed_form()) {
        cdouble acc{0.0, 0.0};
        for (std::size_t j = 0; j < cfg.size(); ++j) acc += test(centered_point(cfg, j));
        return acc;
    }
    // periodized evaluation: sum_images phi = box^-d sum_{k in supp} phi^(k) rho~(-k)
    const auto modes = support_box_modes(test, cfg.box_length);
    std::vector<std::vector<double>> neg(modes.size());
    for (std::size_t m = 0; m < modes.size(); ++m) {
        neg[m] = modes[m];
        for (double& v : neg[m]) v = -v;
    }
    const auto rho_neg = collective_coordinates(cfg, neg);
    const double vol = box_volume(cfg.d, cfg.box_length);
    cdouble acc{0.0, 0.0};
    for (std::size_t m = 0; m < modes.size(); ++m) acc += test.wave(modes[m]) * rho_neg[m];
    return acc / vol;
}

LinstatCertificate linstat_certificate(const TestFunction& test,
                                       const PointConfiguration& cfg) {
    if (!cfg.certificate)
        throw CertificateMissingError("linstat_certificate: configuration is not certified");
    const auto& cert = *cfg.certificate;

    // the test's support must sit inside the certified mask
    const auto modes = support_box_modes(test, cfg.box_length);
    const auto& gg = cert.gap.geometry();
    double max_hat = 0.0;
    std::size_t nonzero_modes = 0;
    for (const auto& k : modes) {
        bool zero = true;
        for (double v : k) zero = zero && v == 0.0;
        if (zero) continue;
        ++nonzero_modes;
        max_hat = std::max(max_hat, std::abs(test.wave(k)));
        std::vector<int> j(gg.d);
        for (int i = 0; i < gg.d; ++i)
            j[i] = static_cast<int>(std::llround(k[i] * gg.box_length / (2.0 * pi)));
        if (!cert.gap.contains(gg.flatten(j)))
            throw SupportViolationError(
                "linstat_certificate: test support leaves the certified gap");
    }

    LinstatCertificate out;
    out.value = linear_statistic(test, cfg);
    out.expected = cfg.rho() * test.hat_at_zero();
    const double vol = box_volume(cfg.d, cfg.box_length);
    out.tolerance = max_hat *
                        std::sqrt(static_cast<double>(nonzero_modes) * cert.final_energy) /
                        vol +
                    1e-12 * std::abs(out.expected);
    out.pass = std::abs(out.value - out.expected) <= out.tolerance;
    return out;
}

double variance_of_lattice_statistic(const std::vector<double>& phi_sites,
                                     const StructureFunction& S) {
    const auto& g = S.geometry;
    if (phi_sites.size() != g.site_count())
        throw std::invalid_argument("variance_of_lattice_statistic: size mismatch");
    LatticeArray arr(g, Space::physical);
    for (std::size_t i = 0; i < phi_sites.size(); ++i) arr.values[i] = phi_sites[i];
    auto hat = forward_dft(arr);
    const double cell = std::pow(g.lattice_spacing(), g.d);
    double acc = 0.0;
    for (std::size_t k = 0; k < hat.values.size(); ++k)
        acc += std::norm(hat.values[k] * cell) * S.values[k];
    return acc / static_cast<double>(g.site_count());
}

double variance_of_linear_statistic(const TestFunction& test, const StructureFunction& S) {
    const auto& g = S.geometry;
    if (test.dim() != g.d)
        throw std::invalid_argument("variance_of_linear_statistic: dimension mismatch");
    if (test.has_wave_closed_form()) {
        double acc = 0.0;
        for (std::size_t flat = 0; flat < g.site_count(); ++flat) {
            if (S.values[flat] == 0.0) continue;
            acc += std::norm(test.wave(g.wavevector(flat))) * S.values[flat];
        }
        return acc / static_cast<double>(g.site_count());
    }
    std::vector<double> phi(g.site_count());
    for (std::size_t flat = 0; flat < g.site_count(); ++flat)
        phi[flat] = test(centered_site(g, flat)).real();
    return variance_of_lattice_statistic(phi, S);
}

double empirical_variance(const TestFunction& test,
                          std::span<const FieldRealization> fields) {
    if (fields.empty()) throw std::invalid_argument("empirical_variance: empty ensemble");
    std::vector<double> vals;
    vals.reserve(fields.size());
    for (const auto& f : fields) vals.push_back(linear_statistic(test, f).real());
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double acc = 0.0;
    for (double v : vals) acc += (v - mean) * (v - mean);
    return vals.size() > 1 ? acc / static_cast<double>(vals.size() - 1) : 0.0;
}

namespace {

// periodic L-inf distance between a point and a center
double periodic_linf(std::span<const double> p, std::span<const double> c, double box) {
    double m = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double dd = std::abs(p[i] - c[i]);
        dd = std::min(dd, box - dd);
        m = std::max(m, dd);
    }
    return m;
}

} // namespace

AnticoncReport anticoncentration_audit(const PointConfiguration& cfg, double b,
                                       const BumpPair& pair) {
    if (!cfg.certificate)
        throw CertificateMissingError("anticoncentration_audit: configuration is not certified");
    if (pair.d != cfg.d) throw std::invalid_argument("anticoncentration_audit: dimension mismatch");
    const double certified_b = gap_radius(cfg.certificate->gap);
    if (!(certified_b >= b))
        throw std::invalid_argument("anticoncentration_audit: certified gap radius below b");

    AnticoncReport rep;
    rep.cube_side = pair.a / b;
    rep.grid_pitch = rep.cube_side / 8.0;
    double bd = 1.0;
    for (int i = 0; i < cfg.d; ++i) bd *= b;
    rep.bound = pair.autocorr_at_zero * cfg.rho() / bd;
    rep.worst_center.assign(cfg.d, 0.0);

    const int steps = std::max(1, static_cast<int>(std::ceil(cfg.box_length / rep.grid_pitch)));
    const double pitch = cfg.box_length / steps;
    rep.grid_pitch = pitch;
    const double half = rep.cube_side / 2.0;

    auto count_at = [&](const std::vector<double>& center) {
        std::size_t count = 0;
        for (std::size_t j = 0; j < cfg.size(); ++j)
            if (periodic_linf(cfg.point(j), center, cfg.box_length) <=
                half * (1.0 + 1e-12))
                ++count;
        return count;
    };
    auto consider = [&](const std::vector<double>& center) {
        const std::size_t count = count_at(center);
        if (count > rep.max_count) {
            rep.max_count = count;
            rep.worst_center = center;
        }
    };

    // grid pass at the documented pitch
    {
        std::vector<int> idx(cfg.d, 0);
        std::vector<double> center(cfg.d);
        while (true) {
            for (int i = 0; i < cfg.d; ++i) center[i] = idx[i] * pitch;
            consider(center);
            int axis = cfg.d - 1;
            while (axis >= 0) {
                if (++idx[axis] < steps) break;
                idx[axis] = 0;
                --axis;
            }
            if (axis < 0) break;
        }
    }
    // point-aligned candidates: the sliding max is attained with each cube
    // face touching a point, so this pass makes the scan exact (and thereby
    // translation-invariant)
    if (cfg.size() > 0) {
        std::vector<std::size_t> pick(cfg.d, 0);
        std::vector<double> center(cfg.d);
        while (true) {
            for (int i = 0; i < cfg.d; ++i)
                center[i] = cfg.coords[pick[i] * cfg.d + i] + half;
            consider(center);
            int axis = cfg.d - 1;
            while (axis >= 0) {
                if (++pick[axis] < cfg.size()) break;
                pick[axis] = 0;
                --axis;
            }
            if (axis < 0) break;
        }
    }
    rep.pass = static_cast<double>(rep.max_count) <= rep.bound;
    return rep;
}

HoleReport find_largest_hole(const PointConfiguration& cfg, int grid_resolution) {
    if (cfg.size() == 0)
        throw std::invalid_argument("find_largest_hole: empty configuration");
    HoleReport rep;
    if (cfg.d == 1) {
        std::vector<double> xs(cfg.size());
        for (std::size_t j = 0; j < cfg.size(); ++j) {
            double x = std::fmod(cfg.coords[j], cfg.box_length);
            if (x < 0.0) x += cfg.box_length;
            xs[j] = x;
        }
        std::sort(xs.begin(), xs.end());
        double best_gap = cfg.box_length - xs.back() + xs.front();
        double best_mid = xs.back() + 0.5 * best_gap;
        for (std::size_t j = 1; j < xs.size(); ++j) {
            const double gap = xs[j] - xs[j - 1];
            if (gap > best_gap) {
                best_gap = gap;
                best_mid = xs[j - 1] + 0.5 * gap;
            }
        }
        rep.radius = 0.5 * best_gap;
        rep.center = {std::fmod(best_mid, cfg.box_length)};
        rep.norm = HoleNorm::euclidean;
        rep.exact = true;
        return rep;
    }

    if (grid_resolution < 1)
        throw std::invalid_argument("find_largest_hole: grid resolution must be >= 1");
    const int steps = 8 * grid_resolution;
    const double pitch = cfg.box_length / steps;
    rep.norm = HoleNorm::linf;
    rep.exact = false;
    rep.center.assign(cfg.d, 0.0);

    std::vector<int> idx(cfg.d, 0);
    std::vector<double> center(cfg.d);
    while (true) {
        for (int i = 0; i < cfg.d; ++i) center[i] = idx[i] * pitch;
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < cfg.size(); ++j)
            nearest = std::min(nearest, periodic_linf(cfg.point(j), center, cfg.box_length));
        if (nearest > rep.radius) {
            rep.radius = nearest;
            rep.center = center;
        }
        int axis = cfg.d - 1;
        while (axis >= 0) {
            if (++idx[axis] < steps) break;
            idx[axis] = 0;
            --axis;
        }
        if (axis < 0) break;
    }
    return rep;
}

bool hole_is_empty(const PointConfiguration& cfg, const HoleReport& hole) {
    for (std::size_t j = 0; j < cfg.size(); ++j) {
        const auto p = cfg.point(j);
        if (hole.norm == HoleNorm::linf) {
            if (periodic_linf(p, hole.center, cfg.box_length) < hole.radius * (1.0 - 1e-12))
                return false;
        } else {
            double acc = 0.0;
            for (int i = 0; i < cfg.d; ++i) {
                double dd = std::abs(p[i] - hole.center[i]);
                dd = std::min(dd, cfg.box_length - dd);
                acc += dd * dd;
            }
            if (std::sqrt(acc) < hole.radius * (1.0 - 1e-12)) return false;
        }
    }
    return true;
}

HoleBoundReport hole_bound(double b, int d, const BumpPair& pair) {
    if (!(b > 0.0)) throw std::invalid_argument("hole_bound: b must be positive");
    if (pair.d != d) throw std::invalid_argument("hole_bound: pair dimension mismatch");

    HoleBoundReport rep;
    rep.a = pair.a;
    rep.autocorr_at_zero = pair.autocorr_at_zero;
    rep.theta_side = pair.a / b;
    rep.c_phi = pair.deriv_l1 / b;

    // T(R) = sum_j [(2(R+j+1))^d - (2(R+j))^d] (R+j)^{-d-1}, exact covering
    // counts of the L-inf annuli by side-theta cubes; the tail beyond J
    // terms is bounded by d 2^d (1+1/q)^{d-1} / (q-1) at q = R+J.
    auto chain_T = [&](int R) {
        const int J = 200000;
        double acc = 0.0;
        for (int j = 0; j < J; ++j) {
            const double q = R + j;
            double outer = 1.0, inner = 1.0;
            for (int i = 0; i < d; ++i) {
                outer *= 2.0 * (q + 1.0);
                inner *= 2.0 * q;
            }
            acc += (outer - inner) * std::pow(q, -d - 1.0);
        }
        const double q = R + J;
        double p2 = 1.0;
        for (int i = 0; i < d; ++i) p2 *= 2.0;
        acc += d * p2 * std::pow(1.0 + 1.0 / q, d - 1.0) / (q - 1.0);
        return acc;
    };

    const double coeff = pair.deriv_l1 * std::pow(pair.a, -d - 1.0);
    int R = 1;
    double value = coeff * chain_T(R);
    while (!(value < 1.0)) {
        if (R > 100000000)
            throw std::runtime_error("hole_bound: chain did not close (constants degenerate)");
        R *= 2;
        value = coeff * chain_T(R);
    }
    // binary search for the smallest integer R with value < 1
    int lo = R / 2 < 1 ? 1 : R / 2, hi = R;
    while (lo + 1 < hi) {
        const int mid = lo + (hi - lo) / 2;
        (coeff * chain_T(mid) < 1.0 ? hi : lo) = mid;
    }
    if (coeff * chain_T(lo) < 1.0) hi = lo;

    rep.R_star = hi;
    rep.chain_value = coeff * chain_T(hi);
    rep.r0_linf = rep.R_star * rep.theta_side;
    rep.r0 = std::sqrt(static_cast<double>(d)) * rep.r0_linf;
    rep.kappa = rep.r0 * b;
    return rep;
}

VarianceDecayReport variance_decay_fit(const StructureFunction& S, const TestFunction& window,
                                       std::vector<double> scales) {
    const auto& g = S.geometry;
    if (scales.size() < 3)
        throw std::invalid_argument("variance_decay_fit: need at least 3 scales");
    for (std::size_t i = 1; i < scales.size(); ++i)
        if (!(scales[i] > scales[i - 1]))
            throw std::invalid_argument("variance_decay_fit: scales must be increasing");
    if (!(scales.back() <= g.box_length / 4.0))
        throw std::invalid_argument("variance_decay_fit: largest scale exceeds box/4");

    VarianceDecayReport rep;
    rep.scales = scales;
    double ref_flat = 0.0; // variance against S == max S, the degeneracy yardstick
    const double smax = S.max_value();
    const bool closed_form = window.kind() == TestFunction::Kind::anticonc;
    for (double L : scales) {
        if (closed_form) {
            // phi_b(x/L) = L^d phi_{b/L}(x): exact wave-space route, exactly
            // zero once the scaled support sits inside the gap
            auto scaled = TestFunction::anticonc(window.pair(), window.b() / L);
            double Ld = 1.0;
            for (int i = 0; i < g.d; ++i) Ld *= L;
            rep.variances.push_back(Ld * Ld * variance_of_linear_statistic(scaled, S));
            ref_flat = 1.0;
            continue;
        }
        std::vector<double> phi(g.site_count());
        for (std::size_t flat = 0; flat < g.site_count(); ++flat) {
            auto x = centered_site(g, flat);
            for (double& c : x) c /= L;
            phi[flat] = window(x).real();
        }
        rep.variances.push_back(variance_of_lattice_statistic(phi, S));
        if (smax > 0.0) {
            double acc = 0.0;
            LatticeArray arr(g, Space::physical);
            for (std::size_t i = 0; i < phi.size(); ++i) arr.values[i] = phi[i];
            auto hat = forward_dft(arr);
            const double cell = std::pow(g.lattice_spacing(), g.d);
            for (const auto& v : hat.values) acc += std::norm(v * cell) * smax;
            ref_flat = std::max(ref_flat, acc / static_cast<double>(g.site_count()));
        }
    }

    bool all_floor = true;
    for (double v : rep.variances)
        if (v > (closed_form ? 0.0 : 1e-18 * ref_flat)) all_floor = false;
    if (all_floor) {
        rep.degenerate = true;
        return rep;
    }

    // least-squares slope of log V on log L
    const std::size_t n = scales.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(scales[i]);
        const double y = std::log(std::max(rep.variances[i], 1e-300));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    rep.slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - rep.slope * sx) / n;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = std::log(std::max(rep.variances[i], 1e-300));
        const double fit = intercept + rep.slope * std::log(scales[i]);
        rss += (y - fit) * (y - fit);
    }
    rep.residual = std::sqrt(rss / n);
    return rep;
}

} // namespace stealthy
