#include "stealthy/gaussian_field.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "stealthy/rng.hpp"

namespace stealthy {

LatticeArray FieldRealization::spectral_amplitude() const {
    LatticeArray a(geometry, Space::physical);
    for (std::size_t i = 0; i < values.size(); ++i) a.values[i] = values[i];
    auto hat = forward_dft(a);
    const double scale = 1.0 / std::sqrt(static_cast<double>(geometry.site_count()));
    for (auto& v : hat.values) v *= scale;
    return hat;
}

FieldRealization sample_one(const GaussianSpec& spec, std::uint64_t index) {
    const auto& g = spec.S.geometry;
    const std::size_t total = g.site_count();
    CounterStream stream = CounterStream(spec.seed).fork(index);

    LatticeArray amp(g, Space::wave);
    for (std::size_t flat = 0; flat < total; ++flat) {
        const std::size_t neg = g.negate_mode(flat);
        if (flat == neg) {
            amp.values[flat] = std::sqrt(spec.S.values[flat]) * stream.normal(flat);
        } else if (flat < neg) {
            double z0, z1;
            stream.normal_pair(flat, z0, z1);
            const cdouble gk = cdouble(z0, z1) / std::sqrt(2.0);
            amp.values[flat] = std::sqrt(spec.S.values[flat]) * gk;
            amp.values[neg] = std::sqrt(spec.S.values[neg]) * std::conj(gk);
        }
    }

    const double scale = std::sqrt(static_cast<double>(total));
    for (auto& v : amp.values) v *= scale;
    auto site = inverse_dft(amp);

    FieldRealization f;
    f.geometry = g;
    f.seed = spec.seed;
    f.index = index;
    f.values.resize(total);
    for (std::size_t i = 0; i < total; ++i) f.values[i] = site.values[i].real();
    return f;
}

std::vector<FieldRealization> sample_field(const GaussianSpec& spec, std::size_t count,
                                           std::uint64_t first_index) {
    if (count < 1) throw std::invalid_argument("sample_field: count must be >= 1");
    std::vector<FieldRealization> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(sample_one(spec, first_index + i));
    return out;
}

std::vector<double> covariance(const GaussianSpec& spec) {
    const auto& g = spec.S.geometry;
    LatticeArray shat(g, Space::wave);
    for (std::size_t i = 0; i < shat.values.size(); ++i) shat.values[i] = spec.S.values[i];
    auto c = inverse_dft(shat);
    std::vector<double> out(c.values.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c.values[i].real();
    return out;
}

DegeneracyReport degeneracy_rank(const GaussianSpec& spec, std::size_t samples) {
    const auto& g = spec.S.geometry;
    const std::size_t dim = g.site_count();
    if (samples == 0) samples = 4 * dim;

    DegeneracyReport rep;
    rep.constraints = count_constraints(spec.S.gap).real_constraints;
    rep.free_dims = dim - rep.constraints;
    rep.samples = samples;

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd v(dim);
    for (std::size_t s = 0; s < samples; ++s) {
        auto f = sample_one(spec, s);
        for (std::size_t i = 0; i < dim; ++i) v(i) = f.values[i];
        cov.noalias() += v * v.transpose();
    }
    cov /= static_cast<double>(samples);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const auto& ev = es.eigenvalues(); // ascending, all >= 0 up to round-off
    const double top = std::max(ev(dim - 1), 0.0);
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > rep.rank_tolerance * top) ++rank;
    rep.empirical_rank = rank;
    return rep;
}

} // namespace stealthy
