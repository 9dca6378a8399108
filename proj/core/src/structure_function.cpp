#include "stealthy/structure_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace stealthy {

void GapRegion::finalize(bool check_symmetry) {
    member_.assign(geometry_.site_count(), 0);
    std::sort(modes_.begin(), modes_.end());
    modes_.erase(std::unique(modes_.begin(), modes_.end()), modes_.end());
    for (std::size_t flat : modes_) {
        if (flat >= member_.size())
            throw std::invalid_argument("GapRegion: mode index out of range");
        member_[flat] = 1;
    }
    if (check_symmetry) {
        for (std::size_t flat : modes_)
            if (!member_[geometry_.negate_mode(flat)])
                throw std::invalid_argument(
                    "GapRegion: mask is not closed under k -> -k (required for real processes)");
    }
}

GapRegion GapRegion::ball_at_origin(const TorusGeometry& g, double radius) {
    if (!(radius > 0.0))
        throw std::invalid_argument("GapRegion::ball_at_origin: radius must be positive");
    GapRegion r;
    r.geometry_ = g;
    r.kind_ = GapKind::ball_at_origin;
    r.radius_ = radius;
    for (std::size_t flat = 0; flat < g.site_count(); ++flat)
        if (g.wavevector_norm(flat) < radius) r.modes_.push_back(flat);
    r.finalize(false); // symmetric by construction: |k| = |-k|
    return r;
}

GapRegion GapRegion::shifted_cube(const TorusGeometry& g, std::vector<double> mu,
                                  double half_width) {
    if (!(half_width > 0.0))
        throw std::invalid_argument("GapRegion::shifted_cube: half_width must be positive");
    if (static_cast<int>(mu.size()) != g.d)
        throw std::invalid_argument("GapRegion::shifted_cube: center dimension mismatch");
    GapRegion r;
    r.geometry_ = g;
    r.kind_ = GapKind::shifted_cube;
    r.center_ = mu;
    r.half_width_ = half_width;
    for (std::size_t flat = 0; flat < g.site_count(); ++flat) {
        auto k = g.wavevector(flat);
        bool in_plus = true, in_minus = true;
        for (int i = 0; i < g.d; ++i) {
            if (!(std::abs(k[i] - mu[i]) < half_width)) in_plus = false;
            if (!(std::abs(k[i] + mu[i]) < half_width)) in_minus = false;
        }
        if (in_plus || in_minus) r.modes_.push_back(flat);
    }
    r.finalize(true);
    return r;
}

GapRegion GapRegion::explicit_mask(const TorusGeometry& g, std::vector<std::size_t> modes) {
    GapRegion r;
    r.geometry_ = g;
    r.kind_ = GapKind::explicit_mask;
    r.modes_ = std::move(modes);
    r.finalize(true);
    return r;
}

GapRegion GapRegion::empty(const TorusGeometry& g) {
    GapRegion r;
    r.geometry_ = g;
    r.kind_ = GapKind::explicit_mask;
    r.finalize(false);
    return r;
}

std::string GapRegion::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case GapKind::ball_at_origin: os << "ball:" << radius_; break;
        case GapKind::shifted_cube:
            os << "cube:";
            for (std::size_t i = 0; i < center_.size(); ++i)
                os << (i ? "," : "") << center_[i];
            os << ":" << half_width_;
            break;
        case GapKind::explicit_mask: os << "mask:" << modes_.size(); break;
    }
    return os.str();
}

StructureFunction StructureFunction::from_values(const TorusGeometry& g,
                                                 std::vector<double> values, GapRegion gap,
                                                 std::string family,
                                                 std::vector<double> params) {
    if (values.size() != g.site_count())
        throw std::invalid_argument("StructureFunction: value count does not match geometry");
    if (!(gap.geometry() == g))
        throw std::invalid_argument("StructureFunction: gap geometry mismatch");
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
        if (!(values[flat] >= 0.0))
            throw std::invalid_argument("StructureFunction: S must be nonnegative");
        const bool zero = values[flat] == 0.0;
        if (zero != gap.contains(flat))
            throw std::invalid_argument(
                "StructureFunction: S must vanish exactly on the gap mask");
    }
    for (std::size_t flat = 0; flat < values.size(); ++flat)
        if (values[flat] != values[g.negate_mode(flat)])
            throw std::invalid_argument("StructureFunction: S(-k) must equal S(k)");
    StructureFunction s;
    s.geometry = g;
    s.values = std::move(values);
    s.gap = std::move(gap);
    s.family = std::move(family);
    s.params = std::move(params);
    return s;
}

StructureFunction StructureFunction::stealthy_flat(const TorusGeometry& g, double b) {
    auto gap = GapRegion::ball_at_origin(g, b);
    std::vector<double> v(g.site_count(), 1.0);
    for (std::size_t flat : gap.modes()) v[flat] = 0.0;
    return from_values(g, std::move(v), std::move(gap), "stealthy-flat", {b});
}

StructureFunction StructureFunction::gs_shifted_cube(const TorusGeometry& g,
                                                     std::vector<double> mu,
                                                     double half_width) {
    auto gap = GapRegion::shifted_cube(g, mu, half_width);
    std::vector<double> v(g.site_count(), 1.0);
    for (std::size_t flat : gap.modes()) v[flat] = 0.0;
    std::vector<double> params = mu;
    params.push_back(half_width);
    return from_values(g, std::move(v), std::move(gap), "gs-shifted-cube", params);
}

double FastDecayProfile::operator()(double knorm) const {
    if (knorm <= 0.0) return 0.0;
    const double k = std::min(knorm, kappa_c);
    return std::exp(-1.0 / std::pow(k, p));
}

StructureFunction StructureFunction::fast_decay(const TorusGeometry& g, double p,
                                                double kappa_c) {
    if (!(p >= 1.0)) throw std::invalid_argument("fast_decay: p must be >= 1");
    FastDecayProfile prof{p, kappa_c};
    std::vector<double> v(g.site_count());
    for (std::size_t flat = 0; flat < v.size(); ++flat) {
        const double s = prof(g.wavevector_norm(flat));
        // exp(-1/|k|^p) underflows near the origin; keep nonzero modes at the
        // smallest normal double so the gap stays exactly {0}
        v[flat] = flat == 0 ? 0.0 : std::max(s, std::numeric_limits<double>::min());
    }
    auto gap = GapRegion::explicit_mask(g, {0});
    return from_values(g, std::move(v), std::move(gap), "fast-decay", {p, kappa_c});
}

StructureFunction StructureFunction::quadratic_hyperuniform(const TorusGeometry& g) {
    std::vector<double> v(g.site_count());
    for (std::size_t flat = 0; flat < v.size(); ++flat) {
        const double k = g.wavevector_norm(flat);
        v[flat] = k * k;
    }
    auto gap = GapRegion::explicit_mask(g, {0});
    return from_values(g, std::move(v), std::move(gap), "quadratic", {});
}

StructureFunction StructureFunction::bragg_lattice(const TorusGeometry& g,
                                                   int points_per_axis) {
    if (points_per_axis < 1 || g.n % points_per_axis != 0)
        throw std::invalid_argument("bragg_lattice: points_per_axis must divide n");
    std::vector<double> v(g.site_count(), 0.0);
    std::vector<std::size_t> mask;
    for (std::size_t flat = 0; flat < v.size(); ++flat) {
        auto m = g.unflatten(flat);
        bool bragg = true;
        for (int i = 0; i < g.d; ++i)
            if (g.signed_index(m[i]) % points_per_axis != 0) bragg = false;
        if (bragg && flat != 0)
            v[flat] = 1.0;
        else
            mask.push_back(flat);
    }
    auto gap = GapRegion::explicit_mask(g, std::move(mask));
    return from_values(g, std::move(v), std::move(gap), "bragg",
                       {static_cast<double>(points_per_axis)});
}

double StructureFunction::max_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

const char* to_string(ProcessClass c) {
    switch (c) {
        case ProcessClass::none: return "none";
        case ProcessClass::hyperuniform: return "hyperuniform";
        case ProcessClass::stealthy: return "stealthy";
        case ProcessClass::generalized_stealthy: return "generalized_stealthy";
    }
    return "?";
}

namespace {

double smallest_nonzero_mode_norm(const TorusGeometry& g) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t flat = 1; flat < g.site_count(); ++flat)
        best = std::min(best, g.wavevector_norm(flat));
    return best;
}

bool touches_nyquist(const GapRegion& gap) {
    const auto& g = gap.geometry();
    for (std::size_t flat : gap.modes()) {
        auto m = g.unflatten(flat);
        for (int i = 0; i < g.d; ++i) {
            const int j = g.signed_index(m[i]);
            if (g.n % 2 == 0 ? j == -g.n / 2 : std::abs(j) == (g.n - 1) / 2) return true;
        }
    }
    return false;
}

} // namespace

Classification classify(const StructureFunction& S) {
    Classification c;
    c.touches_nyquist = touches_nyquist(S.gap);
    if (S.gap.empty_mask()) {
        c.kind = ProcessClass::none;
        return c;
    }
    if (!S.gap.contains_origin()) {
        c.kind = ProcessClass::generalized_stealthy;
        return c;
    }
    // Stealthy needs the whole first shell of nonzero modes masked, so that
    // the mask realizes a ball of positive radius; {0} alone is merely
    // hyperuniform.
    const auto& g = S.geometry;
    const double first_shell = smallest_nonzero_mode_norm(g);
    bool shell_masked = true;
    for (std::size_t flat = 1; flat < g.site_count(); ++flat)
        if (g.wavevector_norm(flat) <= first_shell * (1.0 + 1e-12) && !S.gap.contains(flat))
            shell_masked = false;
    c.kind = shell_masked ? ProcessClass::stealthy : ProcessClass::hyperuniform;
    return c;
}

double gap_radius(const GapRegion& gap) {
    if (!gap.contains_origin())
        throw NotStealthyError("gap_radius: gap does not contain the origin");
    const auto& g = gap.geometry();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t flat = 0; flat < g.site_count(); ++flat)
        if (!gap.contains(flat)) best = std::min(best, g.wavevector_norm(flat));
    if (!std::isfinite(best)) return std::numbers::pi * g.n / g.box_length;
    return best;
}

double gap_radius(const StructureFunction& S) { return gap_radius(S.gap); }

ConstraintCount count_constraints(const GapRegion& gap) {
    ConstraintCount c;
    const auto& g = gap.geometry();
    for (std::size_t flat : gap.modes()) {
        ++c.modes;
        if (g.self_conjugate(flat))
            c.real_constraints += 1;
        else if (gap.contains(g.negate_mode(flat)))
            c.real_constraints += 1; // each member of the pair contributes one
        else
            c.real_constraints += 2; // lone complex constraint (asymmetric mask)
    }
    return c;
}

} // namespace stealthy
