#include <doctest.h>

#include <cmath>

#include "agricurate/error.hpp"
#include "agricurate/pcaviz.hpp"
#include "gen.hpp"
#include "oracles.hpp"

using namespace agricurate;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Random orthogonal matrix (columns) by Gram-Schmidt on Gaussian vectors.
std::vector<std::vector<double>> random_rotation(gen::Source& src, std::size_t dim) {
    std::vector<std::vector<double>> q;
    while (q.size() < dim) {
        std::vector<double> v(dim);
        for (double& x : v) x = src.gauss();
        for (const auto& u : q) {
            const double p = dot(v, u);
            for (std::size_t i = 0; i < dim; ++i) v[i] -= p * u[i];
        }
        const double n = std::sqrt(dot(v, v));
        for (double& x : v) x /= n;
        q.push_back(v);
    }
    return q;
}

// n samples with independent axis standard deviations `sd`, rotated by q.
std::vector<double> anisotropic(gen::Source& src, std::size_t n, const std::vector<double>& sd,
                                const std::vector<std::vector<double>>& q) {
    const std::size_t dim = sd.size();
    std::vector<double> rows;
    rows.reserve(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> out(dim, 1.5);  // nonzero mean
        for (std::size_t a = 0; a < dim; ++a) {
            const double z = sd[a] * src.gauss();
            for (std::size_t d = 0; d < dim; ++d) out[d] += z * q[a][d];
        }
        rows.insert(rows.end(), out.begin(), out.end());
    }
    return rows;
}

std::vector<std::vector<double>> identity(std::size_t dim) {
    std::vector<std::vector<double>> q(dim, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < dim; ++i) q[i][i] = 1.0;
    return q;
}

FeatureTensor tensor(std::uint32_t h, std::uint32_t w, std::uint32_t dim, const std::vector<double>& rows) {
    FeatureTensor t;
    t.grid_h = h;
    t.grid_w = w;
    t.dim = dim;
    for (double v : rows) t.values.push_back(static_cast<float>(v));
    return t;
}

}  // namespace

TEST_CASE("top-3 components agree with a full eigendecomposition") {
    gen::Source src(99);
    for (int trial = 0; trial < 20; ++trial) {
        CAPTURE(trial);
        const std::size_t dim = src.range(3, 12);
        std::vector<double> sd(dim);
        for (std::size_t a = 0; a < dim; ++a) sd[a] = a < 3 ? 6.0 - 1.5 * a : 0.3 * src.unit();
        const auto rows = anisotropic(src, 400, sd, random_rotation(src, dim));
        const auto pc = fit_pca3(rows, dim);
        const auto ref = oracle::covariance_eigen(rows, dim);
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(pc.eigenvalues[k] == doctest::Approx(ref.values[k]).epsilon(1e-6));
            CHECK(pc.shares[k] == doctest::Approx(ref.values[k] / ref.trace).epsilon(1e-6));
            CHECK(std::abs(std::abs(dot(pc.components[k], ref.vectors[k])) - 1.0) <= 1e-6);
        }
    }
}

TEST_CASE("variance shares 9/14, 4/14, 1/14 for axis variances 9, 4, 1") {
    gen::Source src(7);
    const auto rows = anisotropic(src, 10000, {3.0, 2.0, 1.0}, random_rotation(src, 3));
    const auto pc = fit_pca3(rows, 3);
    CHECK(std::abs(pc.shares[0] - 9.0 / 14.0) <= 0.02);
    CHECK(std::abs(pc.shares[1] - 4.0 / 14.0) <= 0.02);
    CHECK(std::abs(pc.shares[2] - 1.0 / 14.0) <= 0.02);
    CHECK(pc.samples == 10000);
}

TEST_CASE("component laws: unit norm, orthogonal, sign convention (property)") {
    gen::Source src(55);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t dim = src.range(3, 20);
        std::vector<double> sd(dim);
        for (double& s : sd) s = 0.1 + 3.0 * src.unit();
        const auto rows = anisotropic(src, src.range(4, 200), sd, random_rotation(src, dim));
        const auto pc = fit_pca3(rows, dim);
        for (std::size_t a = 0; a < 3; ++a) {
            CHECK(std::abs(dot(pc.components[a], pc.components[a]) - 1.0) <= 1e-9);
            for (std::size_t b = a + 1; b < 3; ++b) CHECK(std::abs(dot(pc.components[a], pc.components[b])) <= 1e-6);
            std::size_t arg = 0;
            for (std::size_t d = 1; d < dim; ++d)
                if (std::abs(pc.components[a][d]) > std::abs(pc.components[a][arg])) arg = d;
            CHECK(pc.components[a][arg] > 0.0);
        }
        CHECK(pc.eigenvalues[0] >= pc.eigenvalues[1] * (1.0 - 1e-9));
        CHECK(pc.eigenvalues[1] >= pc.eigenvalues[2] * (1.0 - 1e-9));
        CHECK(pc.shares[0] + pc.shares[1] + pc.shares[2] <= 1.0 + 1e-9);
    }
}

TEST_CASE("rank-1 data: one component carries all the variance") {
    gen::Source src(5);
    const std::vector<double> u = {0.6, 0.0, -0.8, 0.0};
    std::vector<double> rows;
    double sum = 0.0, sum2 = 0.0;
    const int n = 50;
    for (int i = 0; i < n; ++i) {
        const double t = src.gauss() * 4.0;
        sum += t;
        sum2 += t * t;
        for (double c : u) rows.push_back(2.0 + t * c);
    }
    const double var = sum2 / n - (sum / n) * (sum / n);
    const auto pc = fit_pca3(rows, 4);
    CHECK(pc.eigenvalues[0] == doctest::Approx(var).epsilon(1e-9));
    CHECK(pc.shares[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pc.shares[1] <= 1e-9);
    CHECK(std::abs(std::abs(dot(pc.components[0], u)) - 1.0) <= 1e-9);
    CHECK(pc.components[0][2] == doctest::Approx(0.8));  // sign convention flips -u
}

TEST_CASE("duplicating every sample changes nothing") {
    gen::Source src(6);
    const auto rows = anisotropic(src, 60, {4.0, 2.0, 1.0, 0.5}, random_rotation(src, 4));
    auto doubled = rows;
    doubled.insert(doubled.end(), rows.begin(), rows.end());
    const auto a = fit_pca3(rows, 4);
    const auto b = fit_pca3(doubled, 4);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(b.eigenvalues[k] == doctest::Approx(a.eigenvalues[k]).epsilon(1e-9));
        for (std::size_t d = 0; d < 4; ++d) CHECK(b.components[k][d] == doctest::Approx(a.components[k][d]).epsilon(1e-6));
    }
}

TEST_CASE("rotating the data rotates the components and keeps the spectrum") {
    gen::Source src(8);
    const std::size_t dim = 5;
    const auto rows = anisotropic(src, 300, {5.0, 3.0, 2.0, 0.5, 0.2}, identity(dim));
    const auto q = random_rotation(src, dim);
    std::vector<double> rotated(rows.size());
    for (std::size_t i = 0; i < rows.size() / dim; ++i)
        for (std::size_t d = 0; d < dim; ++d) {
            double s = 0.0;
            for (std::size_t e = 0; e < dim; ++e) s += q[d][e] * rows[i * dim + e];
            rotated[i * dim + d] = s;
        }
    const auto a = fit_pca3(rows, dim);
    const auto b = fit_pca3(rotated, dim);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(b.eigenvalues[k] == doctest::Approx(a.eigenvalues[k]).epsilon(1e-8));
        std::vector<double> qa(dim, 0.0);
        for (std::size_t d = 0; d < dim; ++d)
            for (std::size_t e = 0; e < dim; ++e) qa[d] += q[d][e] * a.components[k][e];
        CHECK(std::abs(std::abs(dot(qa, b.components[k])) - 1.0) <= 1e-6);
    }
}

TEST_CASE("PCA input errors") {
    CHECK_THROWS_AS(fit_pca3(std::vector<double>(9, 1.0), 3), DomainError);  // 3 samples
    CHECK_THROWS_AS(fit_pca3(std::vector<double>(8, 1.0), 2), DomainError);
    CHECK_THROWS_AS(fit_pca3(std::vector<double>(13, 1.0), 3), DomainError);
    const auto t = tensor(2, 2, 3, std::vector<double>(12, 0.0));
    Mask fg = make_mask(2, 2, 1);
    fg.at(1, 1) = 0;
    CHECK_THROWS_AS(fit_pca3(t, fg), DomainError);
    CHECK_THROWS_AS(fit_pca3(t, make_mask(3, 2, 1)), DomainError);
}

TEST_CASE("render: background black, constant channels 128, bimodal first channel") {
    const std::uint32_t h = 4, w = 4, dim = 3;
    std::vector<double> rows;
    Mask fg = make_mask(4, 4, 0);
    for (std::uint32_t p = 0; p < h * w; ++p) {
        const bool on = p % 3 != 0;
        fg.data()[p] = on ? 1 : 0;
        rows.push_back(p % 2 ? 10.0 : -10.0);
        rows.push_back(0.0);
        rows.push_back(0.0);
    }
    const auto t = tensor(h, w, dim, rows);
    PrincipalComponents pc;
    pc.mean = {0.0, 0.0, 0.0};
    pc.components = {std::vector<double>{1, 0, 0}, std::vector<double>{0, 1, 0}, std::vector<double>{0, 0, 1}};
    const Image img = render_rgb(t, pc, fg);
    CHECK(img.width() == 4);
    CHECK(img.channels() == 3);
    for (std::uint32_t p = 0; p < h * w; ++p) {
        const int x = static_cast<int>(p % w), y = static_cast<int>(p / w);
        if (!fg.data()[p]) {
            for (int c = 0; c < 3; ++c) CHECK(img.at(x, y, c) == 0);
        } else {
            CHECK(img.at(x, y, 0) == (p % 2 ? 255 : 0));
            CHECK(img.at(x, y, 1) == 128);
            CHECK(img.at(x, y, 2) == 128);
        }
    }
    pc.mean = {0.0, 0.0};
    CHECK_THROWS_AS(render_rgb(t, pc, fg), DomainError);
}

TEST_CASE("fit and render from a tensor use only foreground patches") {
    gen::Source src(10);
    const std::uint32_t h = 6, w = 5, dim = 4;
    std::vector<double> rows;
    Mask fg = make_mask(5, 6, 0);
    for (std::uint32_t p = 0; p < h * w; ++p) {
        fg.data()[p] = p % 4 != 0;
        for (std::uint32_t d = 0; d < dim; ++d) rows.push_back(fg.data()[p] ? src.gauss() * (d + 1) : 1e6);
    }
    const auto t = tensor(h, w, dim, rows);
    const auto fr = foreground_rows(t, fg);
    CHECK(fr.size() % dim == 0);
    for (double v : fr) CHECK(v < 1e5);
    const auto pc = fit_pca3(t, fg);
    const Image img = render_rgb(t, pc, fg);
    int zeros = 0, fulls = 0;
    for (std::uint32_t p = 0; p < h * w; ++p) {
        if (!fg.data()[p]) continue;
        const auto v = img.at(static_cast<int>(p % w), static_cast<int>(p / w), 0);
        zeros += v == 0;
        fulls += v == 255;
    }
    CHECK(zeros >= 1);  // min-max scaling hits both ends
    CHECK(fulls >= 1);
}

TEST_CASE("foreground grid uses a strict majority") {
    Mask veg = make_mask(28, 28, 0);
    // top-left patch: 99 of 196 pixels, top-right: exactly 98
    int placed = 0;
    for (int y = 0; y < 14 && placed < 99; ++y)
        for (int x = 0; x < 14 && placed < 99; ++x, ++placed) veg.at(x, y) = 1;
    placed = 0;
    for (int y = 0; y < 14 && placed < 98; ++y)
        for (int x = 14; x < 28 && placed < 98; ++x, ++placed) veg.at(x, y) = 255;
    for (int y = 14; y < 28; ++y)
        for (int x = 0; x < 14; ++x) veg.at(x, y) = 1;
    const Mask g = foreground_grid(veg, 2, 2);
    CHECK(g.at(0, 0) == 1);
    CHECK(g.at(1, 0) == 0);
    CHECK(g.at(0, 1) == 1);
    CHECK(g.at(1, 1) == 0);
    CHECK_THROWS_AS(foreground_grid(veg, 40, 2), DomainError);
}

TEST_CASE("nearest-neighbour upscale replicates blocks") {
    Image img(2, 2, 3);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>(10 * (y * 2 + x) + c);
    const Image up = upscale_nearest(img, 14);
    CHECK(up.width() == 28);
    CHECK(up.height() == 28);
    for (int y = 0; y < 28; ++y)
        for (int x = 0; x < 28; ++x)
            for (int c = 0; c < 3; ++c) CHECK(up.at(x, y, c) == img.at(x / 14, y / 14, c));
    CHECK(upscale_nearest(img, 1) == img);
    CHECK_THROWS_AS(upscale_nearest(img, 0), DomainError);
}
