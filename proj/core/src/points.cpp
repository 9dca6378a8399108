#include "stealthy/points.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stealthy/rng.hpp"

namespace stealthy {

double PointConfiguration::rho() const {
    double vol = 1.0;
    for (int i = 0; i < d; ++i) vol *= box_length;
    return static_cast<double>(size()) / vol;
}

void PointConfiguration::wrap_into_box() {
    for (double& c : coords) {
        c = std::fmod(c, box_length);
        if (c < 0.0) c += box_length;
    }
}

PointConfiguration PointConfiguration::translated(std::span<const double> shift) const {
    PointConfiguration out = *this;
    const std::size_t N = size();
    for (std::size_t j = 0; j < N; ++j)
        for (int i = 0; i < d; ++i) out.coords[j * d + i] += shift[i];
    out.wrap_into_box();
    return out;
}

std::vector<cdouble> collective_coordinates(const PointConfiguration& cfg,
                                            std::span<const std::vector<double>> wavevectors) {
    std::vector<cdouble> out(wavevectors.size(), cdouble{0.0, 0.0});
    const std::size_t N = cfg.size();
    for (std::size_t m = 0; m < wavevectors.size(); ++m) {
        const auto& k = wavevectors[m];
        cdouble acc{0.0, 0.0};
        for (std::size_t j = 0; j < N; ++j) {
            double phase = 0.0;
            for (int i = 0; i < cfg.d; ++i) phase += k[i] * cfg.coords[j * cfg.d + i];
            acc += std::polar(1.0, -phase);
        }
        out[m] = acc;
    }
    return out;
}

std::vector<double> structure_factor(const PointConfiguration& cfg,
                                     std::span<const std::vector<double>> wavevectors) {
    const std::size_t N = cfg.size();
    if (N == 0) throw UndefinedEstimatorError("structure_factor: empty configuration");
    for (const auto& k : wavevectors) {
        double norm = 0.0;
        for (double v : k) norm += v * v;
        if (norm == 0.0)
            throw std::invalid_argument("structure_factor: k = 0 is excluded by convention");
    }
    auto rho = collective_coordinates(cfg, wavevectors);
    std::vector<double> out(rho.size());
    for (std::size_t m = 0; m < rho.size(); ++m) out[m] = std::norm(rho[m]) / N;
    return out;
}

std::vector<std::vector<double>> nonzero_gap_wavevectors(const GapRegion& gap) {
    std::vector<std::vector<double>> ks;
    for (std::size_t flat : gap.modes()) {
        if (flat == 0) continue;
        ks.push_back(gap.geometry().wavevector(flat));
    }
    return ks;
}

namespace {

void check_gap_matches(const GapRegion& gap, int d, double box_length) {
    if (gap.geometry().d != d)
        throw std::invalid_argument("gap dimension does not match configuration");
    if (gap.geometry().box_length != box_length)
        throw std::invalid_argument("gap box_length does not match configuration");
}

// Energy over the full masked nonzero mode set, evaluated on the canonical
// half set (k and -k give identical |rho~|^2, weight 2; self-conjugate
// nonzero modes weight 1).
struct EnergyModel {
    int d;
    std::vector<std::vector<double>> ks; // canonical half set
    std::vector<double> weights;

    EnergyModel(const GapRegion& gap, int d_) : d(d_) {
        const auto& g = gap.geometry();
        for (std::size_t flat : gap.modes()) {
            if (flat == 0) continue;
            const std::size_t neg = g.negate_mode(flat);
            if (flat == neg) {
                ks.push_back(g.wavevector(flat));
                weights.push_back(1.0);
            } else if (flat < neg) {
                ks.push_back(g.wavevector(flat));
                weights.push_back(2.0);
            }
        }
    }

    double energy(std::span<const double> coords) const {
        const std::size_t N = coords.size() / d;
        double e = 0.0;
        for (std::size_t m = 0; m < ks.size(); ++m) {
            cdouble rho{0.0, 0.0};
            for (std::size_t j = 0; j < N; ++j) {
                double phase = 0.0;
                for (int i = 0; i < d; ++i) phase += ks[m][i] * coords[j * d + i];
                rho += std::polar(1.0, -phase);
            }
            e += weights[m] * std::norm(rho);
        }
        return e;
    }

    // dE/dx_j = sum_k 2 w k Im[conj(rho~(k)) exp(-i k.x_j)]; the first
    // `frozen` points are pinned and get zero gradient.
    double energy_grad(std::span<const double> coords, std::size_t frozen,
                       std::vector<double>& grad) const {
        const std::size_t N = coords.size() / d;
        grad.assign(coords.size(), 0.0);
        double e = 0.0;
        std::vector<cdouble> phases(N);
        for (std::size_t m = 0; m < ks.size(); ++m) {
            cdouble rho{0.0, 0.0};
            for (std::size_t j = 0; j < N; ++j) {
                double phase = 0.0;
                for (int i = 0; i < d; ++i) phase += ks[m][i] * coords[j * d + i];
                phases[j] = std::polar(1.0, -phase);
                rho += phases[j];
            }
            e += weights[m] * std::norm(rho);
            const cdouble rc = std::conj(rho);
            for (std::size_t j = frozen; j < N; ++j) {
                const double im = (rc * phases[j]).imag();
                for (int i = 0; i < d; ++i)
                    grad[j * d + i] += 2.0 * weights[m] * ks[m][i] * im;
            }
        }
        return e;
    }
};

// Plain L-BFGS (two-loop recursion, Armijo backtracking). Returns the reached
// energy; `coords` holds the minimizer. Stops at `floor_energy` or when the
// line search stalls.
double lbfgs_minimize(const EnergyModel& model, std::vector<double>& coords,
                      std::size_t frozen, double floor_energy,
                      std::uint64_t max_iterations, std::uint64_t& iterations_used) {
    const std::size_t n = coords.size();
    const int memory = 10;
    std::vector<std::vector<double>> s_hist, y_hist;
    std::vector<double> rho_hist;

    std::vector<double> grad(n), grad_new(n), dir(n), x_new(n);
    double e = model.energy_grad(coords, frozen, grad);

    for (std::uint64_t iter = 0; iter < max_iterations; ++iter) {
        iterations_used++;
        if (e <= floor_energy) break;

        double gnorm2 = 0.0;
        for (std::size_t i = frozen * model.d; i < n; ++i) gnorm2 += grad[i] * grad[i];
        if (gnorm2 < 1e-32) break;

        // two-loop recursion
        dir = grad;
        std::vector<double> alpha(s_hist.size());
        for (int h = static_cast<int>(s_hist.size()) - 1; h >= 0; --h) {
            double a = 0.0;
            for (std::size_t i = 0; i < n; ++i) a += s_hist[h][i] * dir[i];
            a *= rho_hist[h];
            alpha[h] = a;
            for (std::size_t i = 0; i < n; ++i) dir[i] -= a * y_hist[h][i];
        }
        if (!s_hist.empty()) {
            double sy = 0.0, yy = 0.0;
            const auto& s = s_hist.back();
            const auto& y = y_hist.back();
            for (std::size_t i = 0; i < n; ++i) { sy += s[i] * y[i]; yy += y[i] * y[i]; }
            const double gamma = sy / std::max(yy, 1e-300);
            for (std::size_t i = 0; i < n; ++i) dir[i] *= gamma;
        }
        for (std::size_t h = 0; h < s_hist.size(); ++h) {
            double b = 0.0;
            for (std::size_t i = 0; i < n; ++i) b += y_hist[h][i] * dir[i];
            b *= rho_hist[h];
            for (std::size_t i = 0; i < n; ++i) dir[i] += s_hist[h][i] * (alpha[h] - b);
        }
        for (std::size_t i = 0; i < n; ++i) dir[i] = -dir[i];

        double dg = 0.0;
        for (std::size_t i = 0; i < n; ++i) dg += dir[i] * grad[i];
        if (dg >= 0.0) { // not a descent direction, fall back to steepest
            for (std::size_t i = 0; i < n; ++i) dir[i] = -grad[i];
            dg = -gnorm2;
            s_hist.clear(); y_hist.clear(); rho_hist.clear();
        }

        double t = 1.0;
        double e_new = e;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < n; ++i) x_new[i] = coords[i] + t * dir[i];
            e_new = model.energy(x_new);
            if (e_new <= e + 1e-4 * t * dg) { accepted = true; break; }
            t *= 0.5;
        }
        if (!accepted) break;

        const double e_prev = e;
        e = model.energy_grad(x_new, frozen, grad_new);

        std::vector<double> s_vec(n), y_vec(n);
        double sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s_vec[i] = x_new[i] - coords[i];
            y_vec[i] = grad_new[i] - grad[i];
            sy += s_vec[i] * y_vec[i];
        }
        if (sy > 1e-300) {
            s_hist.push_back(std::move(s_vec));
            y_hist.push_back(std::move(y_vec));
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > static_cast<std::size_t>(memory)) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
        }
        coords = x_new;
        grad = grad_new;
        if (e_prev == e && e > floor_energy) break; // no measurable progress left
    }
    return e;
}

} // namespace

double collective_energy(const PointConfiguration& cfg, const GapRegion& gap) {
    check_gap_matches(gap, cfg.d, cfg.box_length);
    EnergyModel model(gap, cfg.d);
    return model.energy(cfg.coords);
}

double collective_energy_gradient(const PointConfiguration& cfg, const GapRegion& gap,
                                  std::vector<double>& grad) {
    check_gap_matches(gap, cfg.d, cfg.box_length);
    EnergyModel model(gap, cfg.d);
    return model.energy_grad(cfg.coords, 0, grad);
}

PointConfiguration generate_stealthy(std::size_t N, int d, double box_length,
                                     const GapRegion& gap, std::uint64_t seed,
                                     const GenerateOptions& opts,
                                     std::span<const double> pinned) {
    if (N < 1) throw std::invalid_argument("generate_stealthy: N must be >= 1");
    check_gap_matches(gap, d, box_length);
    if (pinned.size() % d != 0)
        throw std::invalid_argument("generate_stealthy: pinned coordinate count not a multiple of d");
    const std::size_t n_pinned = pinned.size() / d;
    if (n_pinned > N)
        throw std::invalid_argument("generate_stealthy: more pinned points than N");

    auto counts = count_constraints(gap);
    const std::size_t nonzero_real =
        counts.real_constraints - (gap.contains_origin() ? 1 : 0);
    if (!(nonzero_real < static_cast<std::size_t>(d) * N))
        throw std::invalid_argument(
            "generate_stealthy: gap masks at least d*N real degrees of freedom "
            "(over-constrained; ground states not generic)");

    EnergyModel model(gap, d);
    const double accept = opts.tolerance * static_cast<double>(N) * static_cast<double>(N);
    // Drive the minimizer well past the certificate threshold; quadratic
    // energies reach ~1e-26 N^2 in double precision, which downstream
    // identity checks rely on.
    const double floor_energy = accept * 1e-16;

    CounterStream root(seed);
    std::vector<double> best;
    double best_energy = std::numeric_limits<double>::infinity();
    std::uint64_t iterations_total = 0;
    int restarts_used = 0;

    for (int restart = 0; restart < opts.max_restarts; ++restart) {
        restarts_used = restart + 1;
        CounterStream stream = root.fork(restart);
        std::vector<double> coords(N * d);
        for (std::size_t i = 0; i < pinned.size(); ++i) coords[i] = pinned[i];
        for (std::size_t i = pinned.size(); i < coords.size(); ++i)
            coords[i] = stream.uniform(i, 0.0, box_length);

        const double e =
            lbfgs_minimize(model, coords, n_pinned, floor_energy, opts.max_iterations,
                           iterations_total);
        if (e < best_energy) {
            best_energy = e;
            best = coords;
        }
        if (best_energy <= accept) break;
    }

    if (best_energy > accept)
        throw NonConvergenceError("generate_stealthy: minimization stalled above tolerance",
                                  best_energy);

    PointConfiguration cfg;
    cfg.d = d;
    cfg.box_length = box_length;
    cfg.coords = std::move(best);
    cfg.wrap_into_box();
    // wrapping leaves every rho~(k) invariant (k is a torus mode), but
    // recompute so the certificate records the stored coordinates
    cfg.certificate = StealthyCertificate{gap, model.energy(cfg.coords), accept,
                                          iterations_total, restarts_used};
    return cfg;
}

PointConfiguration perturbed_lattice(int d, int points_per_axis, double box_length,
                                     double amplitude, const GapRegion& gap,
                                     std::uint64_t seed) {
    if (points_per_axis < 1)
        throw std::invalid_argument("perturbed_lattice: points_per_axis must be >= 1");
    if (amplitude < 0.0)
        throw std::invalid_argument("perturbed_lattice: amplitude must be >= 0");
    check_gap_matches(gap, d, box_length);

    std::size_t N = 1;
    for (int i = 0; i < d; ++i) N *= static_cast<std::size_t>(points_per_axis);
    const double spacing = box_length / points_per_axis;

    PointConfiguration cfg;
    cfg.d = d;
    cfg.box_length = box_length;
    cfg.coords.resize(N * d);
    CounterStream stream(seed);
    for (std::size_t j = 0; j < N; ++j) {
        std::size_t rem = j;
        for (int i = d - 1; i >= 0; --i) {
            cfg.coords[j * d + i] = spacing * static_cast<double>(rem % points_per_axis);
            rem /= points_per_axis;
        }
        for (int i = 0; i < d; ++i)
            cfg.coords[j * d + i] +=
                stream.uniform(j * d + i, -amplitude, amplitude);
    }
    cfg.wrap_into_box();

    const double e = collective_energy(cfg, gap);
    const double accept = 1e-12 * static_cast<double>(N) * static_cast<double>(N);
    if (e <= accept)
        cfg.certificate = StealthyCertificate{gap, e, accept, 0, 0};
    return cfg;
}

} // namespace stealthy
