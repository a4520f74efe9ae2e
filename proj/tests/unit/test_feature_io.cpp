#include <doctest.h>

#include <cmath>
#include <limits>

#include "agricurate/error.hpp"
#include "agricurate/feature_io.hpp"
#include "agricurate/image_io.hpp"
#include "gen.hpp"
#include "oracles.hpp"

using namespace agricurate;

namespace {

FeatureTensor random_tensor(gen::Source& src) {
    FeatureTensor t;
    t.grid_h = src.range(0, 6);
    t.grid_w = src.range(1, 6);
    t.dim = src.range(1, 9);
    t.values.resize(t.patches() * t.dim);
    for (float& v : t.values) v = static_cast<float>(src.gauss() * 100.0);
    return t;
}

}  // namespace

TEST_CASE("agft encoding matches field-by-field bytes and round trips (property)") {
    gen::Source src(37);
    for (int i = 0; i < 100; ++i) {
        const auto t = random_tensor(src);
        const auto bytes = encode_agft(t);
        CHECK(bytes == oracle::agft_bytes(t.grid_h, t.grid_w, t.dim, t.values));
        CHECK(bytes.size() == kAgftHeaderSize + 4 * t.values.size());
        const auto back = decode_agft(bytes);
        CHECK(back.grid_h == t.grid_h);
        CHECK(back.grid_w == t.grid_w);
        CHECK(back.dim == t.dim);
        CHECK(back.values == t.values);
    }
}

TEST_CASE("agft header is little-endian with the documented layout") {
    FeatureTensor t;
    t.grid_h = 37;
    t.grid_w = 0x0102;
    t.dim = 1;
    t.values.assign(t.patches(), 1.0f);
    const auto b = encode_agft(t);
    CHECK(std::string(b.begin(), b.begin() + 4) == "AGFT");
    CHECK(b[4] == 1);
    CHECK(b[5] == 1);
    CHECK(b[8] == 37);
    CHECK(b[12] == 0x02);
    CHECK(b[13] == 0x01);
    // 1.0f = 0x3f800000
    CHECK(b[20] == 0x00);
    CHECK(b[23] == 0x3f);
}

TEST_CASE("malformed agft is rejected") {
    FeatureTensor t;
    t.grid_h = t.grid_w = 2;
    t.dim = 3;
    t.values.assign(12, 0.5f);
    const auto good = encode_agft(t);
    auto mutate = [&](std::size_t at, std::uint8_t v) {
        auto b = good;
        b[at] = v;
        return b;
    };
    CHECK_THROWS_AS(decode_agft(std::span(good.data(), 10)), ParseError);
    CHECK_THROWS_AS(decode_agft(mutate(0, 'X')), ParseError);
    CHECK_THROWS_AS(decode_agft(mutate(4, 2)), ParseError);
    CHECK_THROWS_AS(decode_agft(mutate(5, 2)), ParseError);
    CHECK_THROWS_AS(decode_agft(mutate(7, 1)), ParseError);
    CHECK_THROWS_AS(decode_agft(mutate(16, 4)), ParseError);
    auto shorter = good;
    shorter.pop_back();
    CHECK_THROWS_AS(decode_agft(shorter), ParseError);

    FeatureTensor bad = t;
    bad.values[3] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(encode_agft(bad), DomainError);
    const auto nan_bytes = oracle::agft_bytes(2, 2, 3, bad.values);
    CHECK_THROWS_AS(decode_agft(nan_bytes), DomainError);
    bad.values.pop_back();
    CHECK_THROWS_AS(encode_agft(bad), DomainError);
}

TEST_CASE("agft files carry their filename and file errors name the path") {
    gen::TempDir dir("agft");
    FeatureTensor t;
    t.grid_h = 1;
    t.grid_w = 1;
    t.dim = 2;
    t.values = {1.5f, -2.0f};
    write_agft(dir / "x/f.agft", t);
    const auto back = read_agft(dir / "x/f.agft");
    CHECK(back.source == "f.agft");
    CHECK(back.values == t.values);
    io::write_file_bytes(dir / "bad.agft", std::vector<std::uint8_t>{1, 2, 3});
    try {
        read_agft(dir / "bad.agft");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("bad.agft") != std::string::npos);
    }
}

TEST_CASE("mean pool") {
    FeatureTensor t;
    t.grid_h = 2;
    t.grid_w = 2;
    t.dim = 2;
    t.values = {1, 10, 2, 20, 3, 30, 6, 60};
    CHECK(mean_pool(t) == std::vector<double>{3.0, 30.0});
    FeatureTensor empty;
    empty.dim = 4;
    CHECK_THROWS_AS(mean_pool(empty), DomainError);
}
