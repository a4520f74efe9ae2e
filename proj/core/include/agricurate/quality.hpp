#pragma once

#include <cstdint>
#include <filesystem>

#include "agricurate/manifest.hpp"
#include "agricurate/raster.hpp"

namespace agricurate {

// Stand-in quality metrics: Laplacian variance for blur, mean Rec.601 luma for
// darkness and a 64-bit DCT perceptual hash for near-duplicates.
struct QualityConfig {
    double blur_threshold = 100.0;
    double dark_threshold = 30.0;
    int phash_distance = 10;

    void validate() const;
};

// Rec.601 luma, 0.299 R + 0.587 G + 0.114 B.
inline double luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    return 0.299 * r + 0.587 * g + 0.114 * b;
}

Raster<double> to_luma(const Image& image);

// Population variance of the 4-neighbour Laplacian over interior pixels.
double blur_score(const Image& image);
double mean_luma(const Image& image);

// Area-average resize of a single-channel plane (fractional pixel coverage).
Raster<double> resize_area(const Raster<double>& plane, int out_width, int out_height);

// Orthonormal 2-D DCT-II of a square plane; result indexed at(v, u) with u the
// vertical and v the horizontal frequency.
Raster<double> dct2(const Raster<double>& plane);

// 32x32 area-average grayscale, DCT-II, coefficients (u,v) with 0 <= u,v < 8
// except (0,0), then (8,0); bit = coefficient > median, first coefficient in
// the most significant bit.
std::uint64_t phash64(const Image& image);

inline int hamming(std::uint64_t a, std::uint64_t b) noexcept {
    return __builtin_popcountll(a ^ b);
}

struct CurateStats {
    std::size_t total = 0;
    std::size_t kept = 0;
    std::size_t duplicate = 0;
    std::size_t near_duplicate = 0;
    std::size_t blurry = 0;
    std::size_t dark = 0;
    std::size_t decode_failed = 0;
};

CurateStats curate_stats(const DatasetManifest& manifest);

// Scores every record (parallel), then resolves statuses in lexicographic
// path order: duplicate, near_duplicate, blurry, dark, kept. Statuses are
// recomputed from file contents, so the result does not depend on the input
// statuses. Relative record paths are resolved against `image_root`.
DatasetManifest curate(const DatasetManifest& manifest, const std::filesystem::path& image_root,
                       const QualityConfig& config, int workers = 1);

// Builds an initial manifest from every image under `root` (sorted). The
// collection is the first path component when the file sits in a subdirectory.
DatasetManifest scan_images(const std::filesystem::path& root, int workers = 1);

}  // namespace agricurate
