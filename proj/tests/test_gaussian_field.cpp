#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stealthy/gaussian_field.hpp"

using namespace stealthy;

namespace {
const TorusGeometry g8(1, 8, 2.0 * std::numbers::pi); // integer modes

StructureFunction all_zero(const TorusGeometry& g) {
    std::vector<std::size_t> all(g.site_count());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return StructureFunction::from_values(g, std::vector<double>(g.site_count(), 0.0),
                                          GapRegion::explicit_mask(g, all));
}

StructureFunction all_one(const TorusGeometry& g) {
    return StructureFunction::from_values(g, std::vector<double>(g.site_count(), 1.0),
                                          GapRegion::empty(g));
}
} // namespace

TEST_CASE("zero spectrum gives the zero field exactly") {
    GaussianSpec spec{all_zero(g8), 99};
    auto f = sample_one(spec, 0);
    for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("flat spectrum gives identity site covariance (Monte Carlo)") {
    TorusGeometry g(1, 16, 16.0);
    GaussianSpec spec{all_one(g), 7};
    const std::size_t N = 20000;
    std::vector<std::vector<double>> cov(16, std::vector<double>(16, 0.0));
    for (std::size_t s = 0; s < N; ++s) {
        auto f = sample_one(spec, s);
        for (int i = 0; i < 16; ++i)
            for (int j = 0; j <= i; ++j) cov[i][j] += f.values[i] * f.values[j];
    }
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j <= i; ++j) {
            const double c = cov[i][j] / N;
            if (i == j)
                CHECK(std::abs(c - 1.0) <= 0.03);
            else
                CHECK(std::abs(c) <= 0.03);
        }
}

TEST_CASE("gap modes are machine-zero in every sample") {
    auto S = StructureFunction::stealthy_flat(g8, 1.5); // masks modes 0, +-1
    GaussianSpec spec{S, 2024};
    // spectral amplitude bound equivalent to |forward_dft| <= 1e-10 (n^d max S)^(1/2)
    const double cap = 1e-10 * std::sqrt(S.max_value());
    for (std::uint64_t i = 0; i < 50; ++i) {
        auto f = sample_one(spec, i);
        auto amp = f.spectral_amplitude();
        CHECK(std::abs(amp.values[0]) <= cap);
        CHECK(std::abs(amp.values[g8.storage_index(1)]) <= cap);
        CHECK(std::abs(amp.values[g8.storage_index(-1)]) <= cap);
    }
}

TEST_CASE("per-mode spectral second moment matches S") {
    TorusGeometry g(1, 16, 16.0);
    auto S = StructureFunction::stealthy_flat(g, 0.5);
    GaussianSpec spec{S, 5};
    const std::size_t N = 4000;
    std::vector<double> acc(g.site_count(), 0.0);
    for (std::size_t s = 0; s < N; ++s) {
        auto amp = sample_one(spec, s).spectral_amplitude();
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += std::norm(amp.values[k]);
    }
    for (std::size_t k = 0; k < acc.size(); ++k) {
        const double emp = acc[k] / N;
        CHECK(std::abs(emp - S.values[k]) <=
              5.0 * S.values[k] / std::sqrt(static_cast<double>(N)) + 1e-10);
    }
}

TEST_CASE("identical (seed, index) reproduces bit-identical fields") {
    auto S = StructureFunction::stealthy_flat(g8, 1.5);
    GaussianSpec spec{S, 31337};
    auto a = sample_one(spec, 4);
    auto b = sample_one(spec, 4);
    CHECK(a.values == b.values);
    auto c = sample_one(spec, 5);
    CHECK(a.values != c.values);
}

TEST_CASE("covariance closed forms") {
    SUBCASE("flat spectrum is a Kronecker delta") {
        auto c = covariance({all_one(g8), 0});
        CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-13));
        for (std::size_t r = 1; r < c.size(); ++r) CHECK(std::abs(c[r]) < 1e-13);
    }
    SUBCASE("single surviving mode 0 gives the constant n^-d") {
        std::vector<double> v(8, 0.0);
        v[0] = 1.0;
        std::vector<std::size_t> mask;
        for (std::size_t i = 1; i < 8; ++i) mask.push_back(i);
        auto S = StructureFunction::from_values(g8, v, GapRegion::explicit_mask(g8, mask));
        auto c = covariance({S, 0});
        for (double x : c) CHECK(x == doctest::Approx(1.0 / 8.0).epsilon(1e-13));
    }
    SUBCASE("stealthy-flat matches the 8-term character sum") {
        auto S = StructureFunction::stealthy_flat(g8, 1.5);
        auto c = covariance({S, 0});
        for (std::size_t r = 0; r < 8; ++r) {
            double direct = 0.0;
            const auto x = g8.site_position(r);
            for (std::size_t k = 0; k < 8; ++k)
                direct += S.values[k] * std::cos(g8.wavevector(k)[0] * x[0]);
            direct /= 8.0;
            CHECK(c[r] == doctest::Approx(direct).epsilon(1e-14));
        }
    }
    SUBCASE("covariance is even and C(0) is the mean of S") {
        auto S = StructureFunction::stealthy_flat(g8, 2.5);
        auto c = covariance({S, 0});
        double mean = 0.0;
        for (double v : S.values) mean += v;
        mean /= 8.0;
        CHECK(c[0] == doctest::Approx(mean));
        for (std::size_t r = 1; r < 8; ++r)
            CHECK(c[r] == doctest::Approx(c[(8 - r) % 8]).epsilon(1e-13));
    }
}

TEST_CASE("translation invariance of the empirical covariance") {
    TorusGeometry g(1, 8, 8.0);
    auto S = StructureFunction::stealthy_flat(g, 1.0);
    GaussianSpec spec{S, 11};
    const std::size_t N = 4000;
    std::vector<std::vector<double>> cov(8, std::vector<double>(8, 0.0));
    for (std::size_t s = 0; s < N; ++s) {
        auto f = sample_one(spec, s);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) cov[i][j] += f.values[i] * f.values[j];
    }
    const double tol = 5.0 / std::sqrt(static_cast<double>(N));
    for (int r = 0; r < 8; ++r)
        for (int i = 0; i < 8; ++i)
            CHECK(std::abs(cov[i][(i + r) % 8] / N - cov[0][r] / N) <= 2.0 * tol);
}

TEST_CASE("degeneracy rank equals sites minus constraints") {
    SUBCASE("empty gap leaves everything free") {
        auto rep = degeneracy_rank({all_one(g8), 3}, 64);
        CHECK(rep.constraints == 0);
        CHECK(rep.free_dims == 8);
        CHECK(rep.empirical_rank == 8);
    }
    SUBCASE("three masked modes on n=8 leave rank 5") {
        auto S = StructureFunction::stealthy_flat(g8, 1.5);
        auto rep = degeneracy_rank({S, 17}, 200);
        CHECK(rep.constraints == 3);
        CHECK(rep.free_dims == 5);
        CHECK(rep.empirical_rank == 5);
    }
    SUBCASE("everything masked forces the a.s. zero field") {
        auto rep = degeneracy_rank({all_zero(g8), 23}, 32);
        CHECK(rep.free_dims == 0);
        CHECK(rep.empirical_rank == 0);
    }
}
