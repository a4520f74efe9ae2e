#include "agricurate/pcaviz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "agricurate/error.hpp"
#include "agricurate/rng.hpp"

namespace agricurate {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void normalize(std::vector<double>& v) {
    const double n = std::sqrt(dot(v, v));
    for (double& x : v) x /= n;
}

void orthogonalize(std::vector<double>& v, std::span<const std::vector<double>> basis) {
    for (const auto& b : basis) {
        const double p = dot(v, b);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * b[i];
    }
}

void matvec(const std::vector<double>& a, std::span<const double> v, std::vector<double>& out) {
    const std::size_t d = v.size();
    for (std::size_t i = 0; i < d; ++i) out[i] = dot({a.data() + i * d, d}, v);
}

void apply_sign_convention(std::vector<double>& v) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    }
    if (v[arg] < 0.0) {
        for (double& x : v) x = -x;
    }
}

}  // namespace

PrincipalComponents fit_pca3(std::span<const double> rows, std::size_t dim,
                             const PowerIterationOptions& options) {
    if (dim < 3) throw DomainError("PCA needs feature dimension >= 3");
    if (rows.size() % dim != 0) throw DomainError("PCA input is not a whole number of rows");
    const std::size_t n = rows.size() / dim;
    if (n < 4) throw DomainError("PCA needs at least 4 foreground patches, got " + std::to_string(n));

    PrincipalComponents pc;
    pc.samples = n;
    pc.mean.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) pc.mean[d] += rows[i * dim + d];
    }
    for (double& m : pc.mean) m /= static_cast<double>(n);

    std::vector<double> cov(dim * dim, 0.0);
    std::vector<double> centered(dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) centered[d] = rows[i * dim + d] - pc.mean[d];
        for (std::size_t a = 0; a < dim; ++a) {
            const double ca = centered[a];
            double* row = cov.data() + a * dim;
            for (std::size_t b = a; b < dim; ++b) row[b] += ca * centered[b];
        }
    }
    for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t b = a; b < dim; ++b) {
            cov[a * dim + b] /= static_cast<double>(n);
            cov[b * dim + a] = cov[a * dim + b];
        }
    }
    double total = 0.0;
    for (std::size_t a = 0; a < dim; ++a) total += cov[a * dim + a];

    std::vector<double> work(dim);
    for (std::size_t k = 0; k < 3; ++k) {
        std::span<const std::vector<double>> found(pc.components.data(), k);
        Rng rng(0x5eedULL + k);
        std::vector<double> v(dim);
        for (double& x : v) x = rng.normal();
        orthogonalize(v, found);
        normalize(v);

        double lambda = 0.0;
        double residual = std::numeric_limits<double>::infinity();
        bool converged = false;
        for (int it = 0; it < options.max_iterations; ++it) {
            matvec(cov, v, work);
            orthogonalize(work, found);
            lambda = dot(v, work);
            double r2 = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double e = work[d] - lambda * v[d];
                r2 += e * e;
            }
            residual = std::sqrt(r2);
            const double norm = std::sqrt(dot(work, work));
            if (residual <= options.tolerance * std::max(total, 1e-300) || norm <= 1e-14 * total) {
                converged = true;
                break;
            }
            for (std::size_t d = 0; d < dim; ++d) v[d] = work[d] / norm;
        }
        if (!converged) {
            throw NumericalError("power iteration for component " + std::to_string(k + 1) +
                                     " did not converge; residual " + std::to_string(residual),
                                 residual);
        }
        lambda = std::max(lambda, 0.0);
        // deflate
        for (std::size_t a = 0; a < dim; ++a) {
            for (std::size_t b = 0; b < dim; ++b) cov[a * dim + b] -= lambda * v[a] * v[b];
        }
        orthogonalize(v, found);
        normalize(v);
        apply_sign_convention(v);
        pc.components[k] = std::move(v);
        pc.eigenvalues[k] = lambda;
        pc.shares[k] = total > 0.0 ? lambda / total : 0.0;
    }
    return pc;
}

std::vector<double> foreground_rows(const FeatureTensor& features, const Mask& foreground) {
    features.validate();
    if (foreground.width() != static_cast<int>(features.grid_w) ||
        foreground.height() != static_cast<int>(features.grid_h)) {
        throw DomainError("foreground mask does not match the patch grid");
    }
    std::vector<double> rows;
    for (std::size_t p = 0; p < features.patches(); ++p) {
        if (foreground.data()[p] == 0) continue;
        auto patch = features.patch(p);
        rows.insert(rows.end(), patch.begin(), patch.end());
    }
    return rows;
}

PrincipalComponents fit_pca3(const FeatureTensor& features, const Mask& foreground,
                             const PowerIterationOptions& options) {
    return fit_pca3(foreground_rows(features, foreground), features.dim, options);
}

Mask foreground_grid(const Mask& vegetation, std::uint32_t grid_h, std::uint32_t grid_w) {
    const auto h = static_cast<std::uint64_t>(vegetation.height());
    const auto w = static_cast<std::uint64_t>(vegetation.width());
    if (grid_h == 0 || grid_w == 0 || h < grid_h || w < grid_w) {
        throw DomainError("vegetation mask is smaller than the patch grid");
    }
    Mask grid = make_mask(static_cast<int>(grid_w), static_cast<int>(grid_h));
    for (std::uint32_t r = 0; r < grid_h; ++r) {
        const auto y0 = static_cast<int>(r * h / grid_h);
        const auto y1 = static_cast<int>((r + 1) * h / grid_h);
        for (std::uint32_t c = 0; c < grid_w; ++c) {
            const auto x0 = static_cast<int>(c * w / grid_w);
            const auto x1 = static_cast<int>((c + 1) * w / grid_w);
            std::size_t on = 0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) on += vegetation.at(x, y) != 0 ? 1 : 0;
            }
            const auto area = static_cast<std::size_t>(y1 - y0) * static_cast<std::size_t>(x1 - x0);
            grid.at(static_cast<int>(c), static_cast<int>(r)) = 2 * on > area ? 1 : 0;
        }
    }
    return grid;
}

Image render_rgb(const FeatureTensor& features, const PrincipalComponents& pc,
                 const Mask& foreground) {
    features.validate();
    if (pc.mean.size() != features.dim) throw DomainError("components do not match feature dimension");
    if (foreground.width() != static_cast<int>(features.grid_w) ||
        foreground.height() != static_cast<int>(features.grid_h)) {
        throw DomainError("foreground mask does not match the patch grid");
    }
    const std::size_t patches = features.patches();
    std::vector<std::array<double, 3>> proj(patches);
    std::array<double, 3> lo;
    std::array<double, 3> hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    std::vector<double> centered(features.dim);
    for (std::size_t p = 0; p < patches; ++p) {
        if (foreground.data()[p] == 0) continue;
        auto patch = features.patch(p);
        for (std::size_t d = 0; d < features.dim; ++d) centered[d] = patch[d] - pc.mean[d];
        for (std::size_t k = 0; k < 3; ++k) {
            proj[p][k] = dot(centered, pc.components[k]);
            lo[k] = std::min(lo[k], proj[p][k]);
            hi[k] = std::max(hi[k], proj[p][k]);
        }
    }
    Image out = make_rgb(static_cast<int>(features.grid_w), static_cast<int>(features.grid_h));
    for (std::size_t p = 0; p < patches; ++p) {
        if (foreground.data()[p] == 0) continue;
        const int x = static_cast<int>(p % features.grid_w);
        const int y = static_cast<int>(p / features.grid_w);
        for (std::size_t k = 0; k < 3; ++k) {
            std::uint8_t value = 128;
            if (hi[k] > lo[k]) {
                value = static_cast<std::uint8_t>(std::lround(255.0 * (proj[p][k] - lo[k]) / (hi[k] - lo[k])));
            }
            out.at(x, y, static_cast<int>(k)) = value;
        }
    }
    return out;
}

Image upscale_nearest(const Image& image, int scale) {
    if (scale < 1) throw DomainError("scale must be >= 1");
    Image out(image.width() * scale, image.height() * scale, image.channels());
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            for (int c = 0; c < image.channels(); ++c) out.at(x, y, c) = image.at(x / scale, y / scale, c);
        }
    }
    return out;
}

}  // namespace agricurate
