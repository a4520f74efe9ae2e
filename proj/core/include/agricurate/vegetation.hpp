#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "agricurate/manifest.hpp"
#include "agricurate/raster.hpp"

namespace agricurate {

enum class CoverageSource { external_mask, exg_otsu };

struct VegetationConfig {
    CoverageSource source = CoverageSource::exg_otsu;
    // Interval edges for the non-zero bins; a closed [0,0] bin always precedes
    // them. Must start at 0, end at 1 and increase strictly.
    std::vector<double> bin_edges = default_edges();
    std::size_t target_total = 1;
    std::uint64_t seed = 0;

    static std::vector<double> default_edges();
    void validate() const;
    std::size_t bin_count() const noexcept { return bin_edges.size(); }
};

// Excess green 2g - r - b on chromatic coordinates; 0 for a black pixel.
double exg(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

// ExG mapped linearly from [-1, 2] onto levels 0..255, rounded to nearest.
std::uint8_t exg_level(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

using Histogram256 = std::array<std::uint64_t, 256>;

// Threshold t maximizing between-class variance for classes {<= t} and {> t};
// the smallest t wins among (near-)equal maxima. A histogram with a single
// occupied level returns that level, so nothing lies above it.
int otsu_threshold(const Histogram256& histogram);

// 1 where the ExG level exceeds the Otsu threshold of the tile.
Mask exg_mask(const Image& tile);

double coverage(const Mask& mask);

// Index of the bin holding `value`: 0 for exactly 0, else i+1 for
// (edges[i], edges[i+1]].
std::size_t bin_index(double value, std::span<const double> edges);

struct BinReport {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t available = 0;
    std::size_t selected = 0;
};

struct BalanceResult {
    DatasetManifest manifest;  // kept tiles carry selected = true/false
    std::vector<BinReport> bins;
    std::size_t quota = 0;
    std::size_t total_selected = 0;
};

// Quota q = floor(target / bins); each bin yields min(q, available) tiles by a
// seeded shuffle of its ids keyed on (seed, bin index).
BalanceResult balance(const DatasetManifest& tiles, const VegetationConfig& config);

// Sets veg_coverage on every kept record. In external_mask mode the mask is
// `<mask_dir>/<id>.png` (8-bit, nonzero = vegetation).
DatasetManifest compute_coverage(const DatasetManifest& tiles,
                                 const std::filesystem::path& image_root,
                                 CoverageSource source, const std::filesystem::path& mask_dir,
                                 int workers = 1);

}  // namespace agricurate
