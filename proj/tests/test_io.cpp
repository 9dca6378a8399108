#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "stealthy/io.hpp"
#include "stealthy/rng.hpp"

using namespace stealthy;

TEST_CASE("points CSV round trip") {
    PointConfiguration cfg;
    cfg.d = 2;
    cfg.box_length = 12.5;
    CounterStream s(1);
    for (int j = 0; j < 17; ++j) {
        cfg.coords.push_back(s.uniform(2 * j, 0.0, 12.5));
        cfg.coords.push_back(s.uniform(2 * j + 1, 0.0, 12.5));
    }
    std::stringstream ss;
    write_points_csv(ss, cfg);
    auto back = read_points_csv(ss);
    CHECK(back.d == cfg.d);
    CHECK(back.box_length == cfg.box_length);
    CHECK(back.coords == cfg.coords); // 17 significant digits survive
}

TEST_CASE("field records round trip (binary and CSV)") {
    TorusGeometry g(2, 4, 8.0);
    FieldRealization f;
    f.geometry = g;
    f.seed = 123456789ull;
    f.index = 42;
    CounterStream s(2);
    for (std::size_t i = 0; i < g.site_count(); ++i) f.values.push_back(s.normal(i));

    std::stringstream bin(std::ios::in | std::ios::out | std::ios::binary);
    write_field_binary(bin, f);
    auto fb = read_field_binary(bin);
    CHECK(fb.geometry == f.geometry);
    CHECK(fb.seed == f.seed);
    CHECK(fb.index == f.index);
    CHECK(fb.values == f.values); // bit-exact

    std::stringstream csv;
    write_field_csv(csv, f);
    auto fc = read_field_csv(csv);
    CHECK(fc.geometry == f.geometry);
    CHECK(fc.values == f.values);
}

TEST_CASE("corrupt field header is rejected") {
    std::stringstream bad(std::string("nonsense"), std::ios::in | std::ios::binary);
    CHECK_THROWS(read_field_binary(bad));
}

TEST_CASE("report hash is stable and sensitive") {
    const auto h1 = report_hash("{\"a\":1}");
    const auto h2 = report_hash("{\"a\":1}");
    const auto h3 = report_hash("{\"a\":2}");
    CHECK(h1 == h2);
    CHECK(h1 != h3);
}

TEST_CASE("certificate metadata survives the CSV header") {
    PointConfiguration cfg;
    cfg.d = 1;
    cfg.box_length = 8.0;
    cfg.coords = {0.5, 3.25, 7.0};
    std::stringstream ss;
    write_points_csv(ss, cfg);
    const std::string text = ss.str();
    CHECK(text.find("# d=1") != std::string::npos);
    CHECK(text.find("N=3") != std::string::npos);
    CHECK(text.find("gap=none") != std::string::npos);
}
