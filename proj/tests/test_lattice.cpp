#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stealthy/lattice.hpp"
#include "stealthy/rng.hpp"

using namespace stealthy;

namespace {

// Independent oracle: the O((n^d)^2) character sum, no factorization.
LatticeArray direct_dft(const LatticeArray& a) {
    const auto& g = a.geometry;
    LatticeArray out(g, Space::wave);
    for (std::size_t kf = 0; kf < g.site_count(); ++kf) {
        const auto k = g.wavevector(kf);
        cdouble acc{0.0, 0.0};
        for (std::size_t xf = 0; xf < g.site_count(); ++xf) {
            const auto x = g.site_position(xf);
            double phase = 0.0;
            for (int i = 0; i < g.d; ++i) phase += k[i] * x[i];
            acc += a.values[xf] * std::polar(1.0, -phase);
        }
        out.values[kf] = acc;
    }
    return out;
}

LatticeArray random_array(const TorusGeometry& g, std::uint64_t seed, bool real_valued) {
    CounterStream s(seed);
    LatticeArray a(g, Space::physical);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        double z0, z1;
        s.normal_pair(i, z0, z1);
        a.values[i] = real_valued ? cdouble(z0, 0.0) : cdouble(z0, z1);
    }
    return a;
}

double rel_err(const LatticeArray& got, const LatticeArray& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.values.size(); ++i) {
        num += std::norm(got.values[i] - want.values[i]);
        den += std::norm(want.values[i]);
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

} // namespace

TEST_CASE("delta at the origin transforms to the constant 1") {
    TorusGeometry g(1, 8, 8.0);
    LatticeArray a(g, Space::physical);
    a.values[0] = 1.0;
    auto hat = forward_dft(a);
    for (const auto& v : hat.values) {
        CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(v.imag()) < 1e-14);
    }
}

TEST_CASE("constant input concentrates on mode zero") {
    TorusGeometry g(1, 8, 8.0);
    LatticeArray a(g, Space::physical);
    for (auto& v : a.values) v = 1.0;
    auto hat = forward_dft(a);
    CHECK(hat.values[0].real() == doctest::Approx(8.0));
    for (std::size_t k = 1; k < 8; ++k) CHECK(std::abs(hat.values[k]) < 1e-13);
}

TEST_CASE("forward transform matches the direct character-sum oracle") {
    TorusGeometry g(2, 4, 4.0);
    auto a = random_array(g, 42, false);
    CHECK(rel_err(forward_dft(a), direct_dft(a)) < 1e-12);
}

TEST_CASE("mode_grid enumerates n^d modes, mode zero first") {
    SUBCASE("d=1, n=4, box 4: |k| values {0, pi/2, pi, pi/2}") {
        TorusGeometry g(1, 4, 4.0);
        auto modes = mode_grid(g);
        REQUIRE(modes.size() == 4);
        CHECK(modes[0].k[0] == 0.0);
        CHECK(modes[1].k[0] == doctest::Approx(std::numbers::pi / 2));
        CHECK(std::abs(modes[2].k[0]) == doctest::Approx(std::numbers::pi));
        CHECK(modes[3].k[0] == doctest::Approx(-std::numbers::pi / 2));
    }
    SUBCASE("d=2, n=2: components in {0, -2 pi / box}") {
        TorusGeometry g(2, 2, 3.0);
        auto modes = mode_grid(g);
        REQUIRE(modes.size() == 4);
        for (const auto& m : modes)
            for (double c : m.k) {
                const bool ok = c == 0.0 ||
                                c == doctest::Approx(-2.0 * std::numbers::pi / 3.0);
                CHECK(ok);
            }
    }
    SUBCASE("d=1, n=8, box 2 pi: wavevectors are the integers -4..3") {
        TorusGeometry g(1, 8, 2.0 * std::numbers::pi);
        auto modes = mode_grid(g);
        std::vector<int> expect = {0, 1, 2, 3, -4, -3, -2, -1};
        for (std::size_t i = 0; i < 8; ++i)
            CHECK(modes[i].k[0] == doctest::Approx(expect[i]).epsilon(1e-14));
    }
}

TEST_CASE("round trip, Parseval, and conjugate symmetry across dimensions") {
    struct Case { int d, n; };
    for (Case c : {Case{1, 5}, Case{1, 32}, Case{2, 4}, Case{2, 7}, Case{3, 3}, Case{3, 4}}) {
        CAPTURE(c.d);
        CAPTURE(c.n);
        TorusGeometry g(c.d, c.n, 1.5 * c.n);
        auto a = random_array(g, 1000 + c.d * 100 + c.n, false);

        auto back = inverse_dft(forward_dft(a));
        CHECK(rel_err(back, a) < 1e-12);

        auto hat = forward_dft(a);
        double lhs = 0.0, rhs = 0.0;
        for (const auto& v : hat.values) lhs += std::norm(v);
        for (const auto& v : a.values) rhs += std::norm(v);
        rhs *= static_cast<double>(g.site_count());
        CHECK(std::abs(lhs - rhs) < 1e-12 * rhs);

        auto r = random_array(g, 2000 + c.d * 10 + c.n, true);
        auto rhat = forward_dft(r);
        for (std::size_t flat = 0; flat < g.site_count(); ++flat) {
            const auto neg = g.negate_mode(flat);
            CHECK(std::abs(rhat.values[flat] - std::conj(rhat.values[neg])) <
                  1e-12 * std::sqrt(rhs));
        }
    }
}

TEST_CASE("size mismatch raises a dimension error") {
    TorusGeometry g(1, 8, 8.0);
    LatticeArray a(g, Space::physical);
    a.values.resize(5);
    CHECK_THROWS_AS(forward_dft(a), std::invalid_argument);
    CHECK_THROWS_AS((LatticeArray{g, Space::physical, std::vector<cdouble>(3)}),
                    std::invalid_argument);
}

TEST_CASE("geometry invariants are enforced") {
    CHECK_THROWS_AS(TorusGeometry(0, 8, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(TorusGeometry(1, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(TorusGeometry(1, 8, 0.0), std::invalid_argument);
    TorusGeometry g(3, 4, 2.0);
    CHECK(g.site_count() == 64);
    CHECK(g.lattice_spacing() == doctest::Approx(0.5));
}
