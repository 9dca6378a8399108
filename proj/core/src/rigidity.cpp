#include "stealthy/rigidity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "stealthy/statistics.hpp"

namespace stealthy {

namespace {
constexpr double pi = std::numbers::pi;
}

FieldReconstruction reconstruct_field_inside(const FieldRealization& field,
                                             const GapRegion& gap, const WindowSplit& split) {
    const auto& g = field.geometry;
    if (!(gap.geometry() == g))
        throw std::invalid_argument("reconstruct_field_inside: gap geometry mismatch");

    std::vector<char> is_inside(g.site_count(), 0);
    for (std::size_t s : split.inside) {
        if (s >= g.site_count())
            throw std::invalid_argument("reconstruct_field_inside: inside index out of range");
        if (is_inside[s])
            throw std::invalid_argument("reconstruct_field_inside: duplicate inside index");
        is_inside[s] = 1;
    }

    const std::size_t n_in = split.inside.size();
    const auto counts = count_constraints(gap);
    if (n_in > counts.real_constraints)
        throw RankDeficiencyError(
            "reconstruct_field_inside: window larger than the number of gap constraints");

    FieldReconstruction out;
    if (n_in == 0) return out;

    const auto& masked = gap.modes();
    const std::size_t rows = 2 * masked.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, n_in);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);

    for (std::size_t m = 0; m < masked.size(); ++m) {
        const auto k = g.wavevector(masked[m]);
        cdouble outside_sum{0.0, 0.0};
        for (std::size_t flat = 0; flat < g.site_count(); ++flat) {
            if (is_inside[flat]) continue;
            const auto x = g.site_position(flat);
            double phase = 0.0;
            for (int i = 0; i < g.d; ++i) phase += k[i] * x[i];
            outside_sum += field.values[flat] * std::polar(1.0, -phase);
        }
        rhs(2 * m) = -outside_sum.real();
        rhs(2 * m + 1) = -outside_sum.imag();
        for (std::size_t c = 0; c < n_in; ++c) {
            const auto x = g.site_position(split.inside[c]);
            double phase = 0.0;
            for (int i = 0; i < g.d; ++i) phase += k[i] * x[i];
            const cdouble ch = std::polar(1.0, -phase);
            A(2 * m, c) = ch.real();
            A(2 * m + 1, c) = ch.imag();
        }
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.sigma_max = svd.singularValues()(0);
    out.sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
    if (out.sigma_min < 1e-8 * out.sigma_max)
        throw RankDeficiencyError(
            "reconstruct_field_inside: character matrix is rank-deficient on this window");
    out.conditioning_warning = out.sigma_min < 1e-10;

    Eigen::VectorXd sol = svd.solve(rhs);
    out.residual_norm = (A * sol - rhs).norm();
    out.inside_values.resize(n_in);
    for (std::size_t c = 0; c < n_in; ++c) out.inside_values[c] = sol(c);
    return out;
}

namespace {

// sum over image shells m >= 1 of the per-coordinate sinc^2 envelope
// min(1, 1/(beta*(m*L - L/2))^2), from shell m_from to infinity.
double coordinate_image_sum(double beta, double box, int m_from) {
    double acc = 0.0;
    const int cap = 200000;
    int m = m_from;
    for (; m < m_from + cap; ++m) {
        const double dist = m * box - 0.5 * box;
        const double t = beta * dist;
        acc += std::min(1.0, 1.0 / (t * t));
        if (t > 1.0 && 1.0 / (t * t) < 1e-18) { ++m; break; }
    }
    const double dist = m * box - 0.5 * box;
    acc += 1.0 / (beta * beta * box * dist); // integral remainder bound
    return acc;
}

// total image-sum bound per point: sum over offsets m != 0 with per-axis
// |m_i| <= M of the separable envelope, subtracted pattern
// (1 + 2 S_M)^d - (1 + 2 S_0)^d style.
double image_tail_bound(double beta, int d, double box, int truncated_at) {
    const double s_inf = coordinate_image_sum(beta, box, 1);
    double full = 1.0;
    for (int i = 0; i < d; ++i) full *= (1.0 + 2.0 * s_inf);
    if (truncated_at < 1) return full - 1.0; // all images of an untracked point
    const double s_tail = coordinate_image_sum(beta, box, truncated_at + 1);
    double kept = 1.0;
    for (int i = 0; i < d; ++i) kept *= (1.0 + 2.0 * (s_inf - s_tail));
    return full - kept;
}

} // namespace

ECFSamples ecf_from_outside(const PointConfiguration& outside, double rho,
                            const GapRegion& gap, std::vector<double> mu,
                            const std::vector<std::vector<double>>& theta_grid,
                            const EcfOptions& opts) {
    const int d = outside.d;
    if (gap.geometry().d != d)
        throw std::invalid_argument("ecf_from_outside: gap dimension mismatch");
    const double box = outside.box_length;
    const double r_trunc = opts.truncation_radius > 0.0 ? opts.truncation_radius : 32.0 * box;
    const int m_max = std::max(1, static_cast<int>(std::floor(r_trunc / box)));

    double vol = 1.0;
    for (int i = 0; i < d; ++i) vol *= box;
    const double n_total = rho * vol;
    const double n_inside = n_total - static_cast<double>(outside.size());
    if (n_inside < -0.5)
        throw std::invalid_argument("ecf_from_outside: rho inconsistent with outside count");

    ECFSamples out;
    out.beta0 = opts.beta0;
    out.truncation_radius = r_trunc;
    out.thetas = theta_grid;
    out.values.reserve(theta_grid.size());
    out.error_bars.reserve(theta_grid.size());

    // centered outside coordinates once
    std::vector<std::vector<double>> pts(outside.size());
    for (std::size_t j = 0; j < outside.size(); ++j) pts[j] = centered_point(outside, j);

    const double betas[3] = {opts.beta0, opts.beta0 / 2.0, opts.beta0 / 4.0};
    const auto& gg = gap.geometry();
    const bool lattice_matches = gg.d == d && gg.box_length == box;

    for (const auto& theta : theta_grid) {
        // exact route when mu+theta is a torus mode of the certified mask
        if (lattice_matches) {
            std::vector<int> j(d);
            bool on_lattice = true;
            for (int i = 0; i < d; ++i) {
                const double jj = (mu[i] + theta[i]) * box / (2.0 * pi);
                j[i] = static_cast<int>(std::llround(jj));
                if (std::abs(jj - j[i]) > 1e-9) on_lattice = false;
                if (j[i] < -gg.n / 2 || j[i] >= (gg.n + 1) / 2) on_lattice = false;
            }
            if (on_lattice) {
                const std::size_t flat = gg.flatten(j);
                const bool zero_mode = flat == 0;
                if (zero_mode || gap.contains(flat)) {
                    cdouble acc{0.0, 0.0};
                    for (const auto& p : pts) {
                        double phase = 0.0;
                        for (int i = 0; i < d; ++i) phase += (mu[i] + theta[i]) * p[i];
                        acc += std::polar(1.0, phase);
                    }
                    const cdouble value =
                        zero_mode ? cdouble(n_total, 0.0) - acc : -acc;
                    // covers the certificate residual plus the phase slack
                    // of the 1e-9 mode-rounding tolerance
                    const double bar = (zero_mode ? 0.0
                                                  : std::sqrt(std::max(
                                                        0.0, opts.certified_energy))) +
                                       (1e-12 + 1e-9 * pi * d) * n_total;
                    if (opts.required_tolerance > 0.0 && bar > opts.required_tolerance)
                        throw PrecisionError(
                            "ecf_from_outside: certified energy too large for the "
                            "requested tolerance");
                    out.values.push_back(value);
                    out.error_bars.push_back(bar);
                    continue;
                }
            }
        }

        cdouble v[3];
        for (int bi = 0; bi < 3; ++bi) {
            auto phi = TestFunction::rigidity(gap, mu, theta, betas[bi]);
            cdouble outside_sum{0.0, 0.0};
            // sum over the outside points and their periodic images with
            // per-axis offset up to m_max
            std::vector<int> off(d, -m_max);
            while (true) {
                std::vector<double> shift(d);
                for (int i = 0; i < d; ++i) shift[i] = off[i] * box;
                for (const auto& p : pts) {
                    std::vector<double> x(d);
                    for (int i = 0; i < d; ++i) x[i] = p[i] + shift[i];
                    outside_sum += phi(x);
                }
                int axis = d - 1;
                while (axis >= 0) {
                    if (++off[axis] <= m_max) break;
                    off[axis] = -m_max;
                    --axis;
                }
                if (axis < 0) break;
            }
            v[bi] = rho * phi.hat_at_zero() - outside_sum;
        }
        // Richardson in beta^2: eliminates the beta^2 and beta^4 terms of
        // the even sinc^2 expansion
        const cdouble r1a = (4.0 * v[1] - v[0]) / 3.0;
        const cdouble r1b = (4.0 * v[2] - v[1]) / 3.0;
        const cdouble extrap = (16.0 * r1b - r1a) / 15.0;
        const double extr_resid = std::abs(extrap - r1b);

        const double beta_min = betas[2];
        const double tail_outside =
            static_cast<double>(outside.size()) * image_tail_bound(beta_min, d, box, m_max);
        const double tail_inside =
            std::max(0.0, n_inside) * image_tail_bound(beta_min, d, box, 0);
        const double bar = tail_outside + tail_inside + extr_resid + 1e-12 * n_total;

        if (opts.required_tolerance > 0.0 && bar > opts.required_tolerance)
            throw PrecisionError(
                "ecf_from_outside: error bar exceeds requested tolerance; increase the "
                "truncation radius");

        out.values.push_back(extrap);
        out.error_bars.push_back(bar);
    }
    return out;
}

namespace {

// Gauss-Newton refinement of unit-weight positions against the samples.
void polish_positions_1d(const ECFSamples& ecf, std::vector<double>& xs) {
    const std::size_t M = ecf.values.size();
    const int N = static_cast<int>(xs.size());
    Eigen::MatrixXd J(2 * M, N);
    Eigen::VectorXd r(2 * M);
    for (int iter = 0; iter < 40; ++iter) {
        for (std::size_t m = 0; m < M; ++m) {
            const double th = ecf.thetas[m][0];
            cdouble model{0.0, 0.0};
            for (int j = 0; j < N; ++j) {
                const cdouble e = std::polar(1.0, th * xs[j]);
                model += e;
                const cdouble dx = cdouble(0.0, th) * e;
                J(2 * m, j) = dx.real();
                J(2 * m + 1, j) = dx.imag();
            }
            const cdouble res = model - ecf.values[m];
            r(2 * m) = res.real();
            r(2 * m + 1) = res.imag();
        }
        Eigen::VectorXd step = J.colPivHouseholderQr().solve(-r);
        if (!step.allFinite()) return;
        for (int j = 0; j < N; ++j) xs[j] += step(j);
        if (step.norm() < 1e-14) break;
    }
}

PointRecovery pencil_1d(const ECFSamples& ecf, int N, double residual_tolerance) {
    const std::size_t M = ecf.values.size();
    if (M < static_cast<std::size_t>(2 * N + 2))
        throw std::invalid_argument("invert_ecf_to_points: need at least 2N+2 theta samples");

    // require a uniform 1D grid
    const double theta0 = ecf.thetas.front()[0];
    const double dtheta = ecf.thetas[1][0] - theta0;
    for (std::size_t m = 1; m < M; ++m) {
        const double expect = theta0 + dtheta * static_cast<double>(m);
        if (std::abs(ecf.thetas[m][0] - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
            throw std::invalid_argument("invert_ecf_to_points: theta grid is not uniform");
    }

    using CMat = Eigen::MatrixXcd;
    const std::size_t Lp = M / 2;
    const std::size_t rows = M - Lp;
    CMat Y0(rows, Lp), Y1(rows, Lp);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < Lp; ++j) {
            Y0(i, j) = ecf.values[i + j];
            Y1(i, j) = ecf.values[i + j + 1];
        }

    Eigen::BDCSVD<CMat> svd(Y0, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sig = svd.singularValues();
    PointRecovery rec;
    if (sig(0) > 0.0 && sig(std::min<std::size_t>(N, sig.size()) - 1) / sig(0) < 1e-13)
        rec.ill_posed_warning = true;

    CMat Un = svd.matrixU().leftCols(N);
    CMat Vn = svd.matrixV().leftCols(N);
    Eigen::VectorXd sn = sig.head(N);
    CMat S1 = Un.adjoint() * Y1 * Vn;
    for (int c = 0; c < N; ++c) S1.col(c) /= sn(c);

    Eigen::ComplexEigenSolver<CMat> es(S1);
    std::vector<double> xs(N);
    for (int j = 0; j < N; ++j)
        xs[j] = std::arg(es.eigenvalues()(j)) / dtheta;
    std::sort(xs.begin(), xs.end());
    polish_positions_1d(ecf, xs);
    std::sort(xs.begin(), xs.end());

    // unit-weight Vandermonde residual against the samples
    CMat V(M, N);
    for (std::size_t m = 0; m < M; ++m)
        for (int j = 0; j < N; ++j)
            V(m, j) = std::polar(1.0, (theta0 + dtheta * m) * xs[j]);
    Eigen::VectorXcd f(M);
    for (std::size_t m = 0; m < M; ++m) f(m) = ecf.values[m];
    Eigen::VectorXcd w = V.colPivHouseholderQr().solve(f);
    rec.residual = (V * w - f).cwiseAbs().maxCoeff();

    double fscale = 0.0;
    for (const auto& v : ecf.values) fscale = std::max(fscale, std::abs(v));
    for (int i = 0; i + 1 < N; ++i)
        if (xs[i + 1] - xs[i] < 1e-7 * std::max(1.0, std::abs(xs[N - 1] - xs[0])))
            rec.ill_posed_warning = true;

    rec.positions.resize(N);
    for (int j = 0; j < N; ++j) rec.positions[j] = {xs[j]};
    if (rec.residual > residual_tolerance * std::max(1.0, fscale))
        throw InversionFailureError("invert_ecf_to_points: residual above tolerance", rec);
    return rec;
}

PointRecovery nls_2d(const ECFSamples& ecf, int N, double residual_tolerance) {
    const std::size_t M = ecf.values.size();
    if (M < static_cast<std::size_t>(2 * N + 2))
        throw std::invalid_argument("invert_ecf_to_points: need more theta samples");

    // adjoint transform on a search grid sized by the theta spacing
    double dtheta = std::numeric_limits<double>::infinity();
    for (std::size_t m = 1; m < M; ++m) {
        double diff = 0.0;
        for (int i = 0; i < 2; ++i)
            diff = std::max(diff, std::abs(ecf.thetas[m][i] - ecf.thetas[m - 1][i]));
        if (diff > 0.0) dtheta = std::min(dtheta, diff);
    }
    const double range = pi / dtheta;
    const int G = 96;
    std::vector<std::vector<double>> seeds;
    std::vector<double> amp(G * G, 0.0);
    for (int gy = 0; gy < G; ++gy)
        for (int gx = 0; gx < G; ++gx) {
            const double x = -range + 2.0 * range * gx / (G - 1);
            const double y = -range + 2.0 * range * gy / (G - 1);
            cdouble acc{0.0, 0.0};
            for (std::size_t m = 0; m < M; ++m) {
                const double phase = ecf.thetas[m][0] * x + ecf.thetas[m][1] * y;
                acc += ecf.values[m] * std::polar(1.0, -phase);
            }
            amp[gy * G + gx] = std::abs(acc);
        }
    // greedy peaks with suppression
    std::vector<char> used(G * G, 0);
    for (int pick = 0; pick < N; ++pick) {
        double best = -1.0;
        int bi = -1;
        for (int i = 0; i < G * G; ++i)
            if (!used[i] && amp[i] > best) { best = amp[i]; bi = i; }
        const int gy = bi / G, gx = bi % G;
        const double x = -range + 2.0 * range * gx / (G - 1);
        const double y = -range + 2.0 * range * gy / (G - 1);
        seeds.push_back({x, y});
        const int sup = std::max(1, G / 16);
        for (int yy = std::max(0, gy - sup); yy < std::min(G, gy + sup + 1); ++yy)
            for (int xx = std::max(0, gx - sup); xx < std::min(G, gx + sup + 1); ++xx)
                used[yy * G + xx] = 1;
    }

    // Gauss-Newton on positions, unit weights
    Eigen::VectorXd p(2 * N);
    for (int j = 0; j < N; ++j) { p(2 * j) = seeds[j][0]; p(2 * j + 1) = seeds[j][1]; }
    for (int iter = 0; iter < 60; ++iter) {
        Eigen::MatrixXd J(2 * M, 2 * N);
        Eigen::VectorXd r(2 * M);
        for (std::size_t m = 0; m < M; ++m) {
            cdouble model{0.0, 0.0};
            for (int j = 0; j < N; ++j) {
                const double phase =
                    ecf.thetas[m][0] * p(2 * j) + ecf.thetas[m][1] * p(2 * j + 1);
                const cdouble e = std::polar(1.0, phase);
                model += e;
                const cdouble dx = cdouble(0.0, ecf.thetas[m][0]) * e;
                const cdouble dy = cdouble(0.0, ecf.thetas[m][1]) * e;
                J(2 * m, 2 * j) = dx.real();
                J(2 * m + 1, 2 * j) = dx.imag();
                J(2 * m, 2 * j + 1) = dy.real();
                J(2 * m + 1, 2 * j + 1) = dy.imag();
            }
            const cdouble res = model - ecf.values[m];
            r(2 * m) = res.real();
            r(2 * m + 1) = res.imag();
        }
        Eigen::VectorXd step = J.colPivHouseholderQr().solve(-r);
        p += step;
        if (step.norm() < 1e-14) break;
    }

    PointRecovery rec;
    rec.positions.resize(N);
    for (int j = 0; j < N; ++j) rec.positions[j] = {p(2 * j), p(2 * j + 1)};
    std::sort(rec.positions.begin(), rec.positions.end());

    double fscale = 0.0, resid = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        cdouble model{0.0, 0.0};
        for (int j = 0; j < N; ++j) {
            const double phase = ecf.thetas[m][0] * rec.positions[j][0] +
                                 ecf.thetas[m][1] * rec.positions[j][1];
            model += std::polar(1.0, phase);
        }
        resid = std::max(resid, std::abs(model - ecf.values[m]));
        fscale = std::max(fscale, std::abs(ecf.values[m]));
    }
    rec.residual = resid;
    for (int i = 0; i + 1 < N; ++i) {
        const double dx = rec.positions[i + 1][0] - rec.positions[i][0];
        const double dy = rec.positions[i + 1][1] - rec.positions[i][1];
        if (std::sqrt(dx * dx + dy * dy) < 1e-7 * range) rec.ill_posed_warning = true;
    }
    if (rec.residual > residual_tolerance * std::max(1.0, fscale))
        throw InversionFailureError("invert_ecf_to_points: residual above tolerance", rec);
    return rec;
}

} // namespace

PointRecovery invert_ecf_to_points(const ECFSamples& ecf, int N, int d,
                                   double residual_tolerance) {
    if (N < 1) throw std::invalid_argument("invert_ecf_to_points: N must be >= 1");
    if (ecf.values.size() != ecf.thetas.size())
        throw std::invalid_argument("invert_ecf_to_points: malformed samples");
    if (d == 1) return pencil_1d(ecf, N, residual_tolerance);
    if (d == 2) return nls_2d(ecf, N, residual_tolerance);
    throw std::invalid_argument("invert_ecf_to_points: only d = 1 and d = 2 are supported");
}

MomentRecovery recover_inside_moments(std::span<const FieldRealization> fields,
                                      const std::vector<double>& d_half_widths, int max_order,
                                      const std::vector<double>& scales,
                                      double window_sharpness) {
    if (fields.empty())
        throw std::invalid_argument("recover_inside_moments: empty ensemble");
    const auto& g = fields.front().geometry;
    const int d = g.d;
    if (static_cast<int>(d_half_widths.size()) != d)
        throw std::invalid_argument("recover_inside_moments: domain dimension mismatch");
    for (double L : scales)
        if (!(L >= 1.0) || !(L <= g.box_length / 4.0))
            throw std::invalid_argument(
                "recover_inside_moments: scales must lie in [1, box_length/4]");

    // enumerate multi-indices with |k| <= max_order
    MomentRecovery out;
    out.scales = scales;
    {
        std::vector<int> k(d, 0);
        while (true) {
            int total = 0;
            for (int v : k) total += v;
            if (total <= max_order) out.indices.push_back(k);
            int axis = d - 1;
            while (axis >= 0) {
                if (++k[axis] <= max_order) break;
                k[axis] = 0;
                --axis;
            }
            if (axis < 0) break;
        }
        std::sort(out.indices.begin(), out.indices.end(),
                  [](const auto& a, const auto& b) {
                      int sa = 0, sb = 0;
                      for (int v : a) sa += v;
                      for (int v : b) sb += v;
                      return sa != sb ? sa < sb : a < b;
                  });
    }

    const double cell = std::pow(g.lattice_spacing(), d);
    std::vector<std::vector<double>> sites(g.site_count());
    std::vector<char> inside(g.site_count(), 0);
    for (std::size_t flat = 0; flat < g.site_count(); ++flat) {
        sites[flat] = centered_site(g, flat);
        bool in = true;
        for (int i = 0; i < d; ++i)
            if (std::abs(sites[flat][i]) > d_half_widths[i]) in = false;
        inside[flat] = in ? 1 : 0;
    }

    out.median_abs_error.assign(out.indices.size(),
                                std::vector<double>(scales.size(), 0.0));
    out.surrogates.assign(out.indices.size(),
                          std::vector<std::vector<double>>(scales.size()));

    for (std::size_t ki = 0; ki < out.indices.size(); ++ki) {
        const auto& kidx = out.indices[ki];
        for (std::size_t li = 0; li < scales.size(); ++li) {
            const double L = scales[li];
            auto w = TestFunction::monomial_window(kidx, L, d_half_widths, window_sharpness);
            std::vector<double> errors;
            errors.reserve(fields.size());
            for (const auto& f : fields) {
                if (!(f.geometry == g))
                    throw std::invalid_argument("recover_inside_moments: mixed geometries");
                double surrogate = 0.0, direct = 0.0;
                for (std::size_t flat = 0; flat < g.site_count(); ++flat) {
                    if (inside[flat]) {
                        double mono = 1.0;
                        for (int i = 0; i < d; ++i)
                            for (int r = 0; r < kidx[i]; ++r) mono *= sites[flat][i];
                        direct += mono * f.values[flat];
                    } else {
                        surrogate -= w(sites[flat]).real() * f.values[flat];
                    }
                }
                surrogate *= cell;
                direct *= cell;
                out.surrogates[ki][li].push_back(surrogate);
                errors.push_back(std::abs(surrogate - direct));
            }
            std::sort(errors.begin(), errors.end());
            out.median_abs_error[ki][li] = errors[errors.size() / 2];
        }
    }
    return out;
}

} // namespace stealthy
