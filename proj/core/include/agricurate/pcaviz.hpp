#pragma once

#include <array>
#include <span>
#include <vector>

#include "agricurate/feature_io.hpp"
#include "agricurate/raster.hpp"

namespace agricurate {

struct PowerIterationOptions {
    double tolerance = 1e-9;
    int max_iterations = 10000;
};

// Top-3 principal axes. Components are unit norm, mutually orthogonal, and
// signed so their largest-magnitude coordinate is positive.
struct PrincipalComponents {
    std::vector<double> mean;
    std::array<std::vector<double>, 3> components;
    std::array<double, 3> eigenvalues{};
    std::array<double, 3> shares{};  // eigenvalue / total variance
    std::size_t samples = 0;
};

// Rows are samples, row-major n x dim, dim >= 3, n >= 4.
PrincipalComponents fit_pca3(std::span<const double> rows, std::size_t dim,
                             const PowerIterationOptions& options = {});

// Uses the patches flagged in the grid-sized foreground mask.
PrincipalComponents fit_pca3(const FeatureTensor& features, const Mask& foreground,
                             const PowerIterationOptions& options = {});

// Foreground rows of several tensors stacked, for a joint fit.
std::vector<double> foreground_rows(const FeatureTensor& features, const Mask& foreground);

// A patch is foreground when more than half of its pixels are vegetation.
Mask foreground_grid(const Mask& vegetation, std::uint32_t grid_h, std::uint32_t grid_w);

// Projections min-max scaled per channel over the foreground; background
// black, constant channels 128.
Image render_rgb(const FeatureTensor& features, const PrincipalComponents& pc,
                 const Mask& foreground);

Image upscale_nearest(const Image& image, int scale);

}  // namespace agricurate
