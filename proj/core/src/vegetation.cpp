#include "agricurate/vegetation.hpp"

#include <algorithm>
#include <cmath>

#include "agricurate/error.hpp"
#include "agricurate/image_io.hpp"
#include "agricurate/parallel.hpp"
#include "agricurate/rng.hpp"

namespace agricurate {
namespace fs = std::filesystem;

std::vector<double> VegetationConfig::default_edges() {
    std::vector<double> edges;
    for (int k = 0; k <= 10; ++k) edges.push_back(k / 10.0);
    return edges;
}

void VegetationConfig::validate() const {
    if (bin_edges.size() < 2 || bin_edges.front() != 0.0 || bin_edges.back() != 1.0) {
        throw ConfigError("bin edges must start at 0 and end at 1");
    }
    for (std::size_t i = 1; i < bin_edges.size(); ++i) {
        if (!(bin_edges[i] > bin_edges[i - 1])) {
            throw ConfigError("bin edges must be strictly increasing");
        }
    }
    if (target_total < 1) throw ConfigError("target total must be >= 1");
}

double exg(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    const int sum = r + g + b;
    if (sum == 0) return 0.0;
    return (2.0 * g - r - b) / sum;
}

std::uint8_t exg_level(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    // (ExG + 1) / 3 equals the green chromaticity g / (r + g + b), so the level
    // is round(255 * G / S) in exact integer arithmetic.
    const int sum = r + g + b;
    if (sum == 0) return 85;  // ExG = 0
    return static_cast<std::uint8_t>((510 * g + sum) / (2 * sum));
}

int otsu_threshold(const Histogram256& histogram) {
    long double total = 0.0L;
    long double weighted = 0.0L;
    for (int level = 0; level < 256; ++level) {
        total += static_cast<long double>(histogram[level]);
        weighted += static_cast<long double>(histogram[level]) * level;
    }
    std::array<long double, 256> between{};
    between.fill(-1.0L);
    long double count0 = 0.0L;
    long double sum0 = 0.0L;
    long double best = -1.0L;
    for (int t = 0; t < 256; ++t) {
        count0 += static_cast<long double>(histogram[t]);
        sum0 += static_cast<long double>(histogram[t]) * t;
        const long double count1 = total - count0;
        if (count0 == 0.0L || count1 == 0.0L) continue;
        // N^2 times the between-class variance
        const long double diff = total * sum0 - count0 * weighted;
        between[t] = diff * diff / (count0 * count1);
        best = std::max(best, between[t]);
    }
    if (best < 0.0L) {
        // one occupied level: nothing lies above it
        for (int level = 0; level < 256; ++level) {
            if (histogram[level] != 0) return level;
        }
        return 0;
    }
    for (int t = 0; t < 256; ++t) {
        if (between[t] >= best * (1.0L - 1e-12L)) return t;
    }
    return 0;
}

Mask exg_mask(const Image& tile) {
    if (tile.empty()) throw DomainError("exg_mask of an empty tile");
    Mask levels = make_mask(tile.width(), tile.height());
    Histogram256 histogram{};
    for (int y = 0; y < tile.height(); ++y) {
        auto src = tile.row(y);
        auto dst = levels.row(y);
        for (int x = 0; x < tile.width(); ++x) {
            dst[x] = exg_level(src[3 * x], src[3 * x + 1], src[3 * x + 2]);
            ++histogram[dst[x]];
        }
    }
    const int threshold = otsu_threshold(histogram);
    for (auto& v : levels.data()) v = v > threshold ? 1 : 0;
    return levels;
}

double coverage(const Mask& mask) {
    if (mask.empty()) throw DomainError("coverage of an empty mask");
    const auto data = mask.data();
    const auto on = std::count_if(data.begin(), data.end(), [](std::uint8_t v) { return v != 0; });
    return static_cast<double>(on) / static_cast<double>(data.size());
}

std::size_t bin_index(double value, std::span<const double> edges) {
    if (value <= 0.0) return 0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (value <= edges[i + 1]) return i + 1;
    }
    return edges.size() - 1;
}

BalanceResult balance(const DatasetManifest& tiles, const VegetationConfig& config) {
    config.validate();
    const std::size_t bins = config.bin_count();
    std::vector<std::vector<std::size_t>> members(bins);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < tiles.records.size(); ++i) {
        const auto& r = tiles.records[i];
        if (!r.kept()) continue;
        if (!r.veg_coverage) {
            throw DomainError("tile `" + r.id + "` has no veg_coverage; run vegcover first");
        }
        members[bin_index(*r.veg_coverage, config.bin_edges)].push_back(i);
        ++kept;
    }
    if (kept == 0) throw DomainError("no kept tiles to balance");

    BalanceResult result;
    result.manifest = tiles;
    result.quota = config.target_total / bins;
    for (auto& r : result.manifest.records) {
        if (r.kept()) r.selected = false;
    }
    for (std::size_t b = 0; b < bins; ++b) {
        auto& ids = members[b];
        std::sort(ids.begin(), ids.end(), [&](std::size_t x, std::size_t y) {
            return tiles.records[x].id < tiles.records[y].id;
        });
        Rng rng(Rng::derive(config.seed, b));
        rng.shuffle(std::span<std::size_t>(ids));
        const std::size_t take = std::min(result.quota, ids.size());
        for (std::size_t k = 0; k < take; ++k) result.manifest.records[ids[k]].selected = true;

        BinReport report;
        report.lo = b == 0 ? 0.0 : config.bin_edges[b - 1];
        report.hi = b == 0 ? 0.0 : config.bin_edges[b];
        report.available = ids.size();
        report.selected = take;
        result.bins.push_back(report);
        result.total_selected += take;
    }
    return result;
}

DatasetManifest compute_coverage(const DatasetManifest& tiles, const fs::path& image_root,
                                 CoverageSource source, const fs::path& mask_dir, int workers) {
    DatasetManifest out = tiles;
    parallel_for(out.records.size(), workers, [&](std::size_t i) {
        ImageRecord& r = out.records[i];
        if (!r.kept()) return;
        if (source == CoverageSource::external_mask) {
            const fs::path file = mask_dir / (r.id + ".png");
            auto mask = io::read_gray(file);
            if (!mask) throw IoError("cannot read 8-bit single-channel mask " + file.string());
            if (mask->width() != r.width || mask->height() != r.height) {
                throw DomainError("mask " + file.string() + " does not match tile dimensions");
            }
            r.veg_coverage = coverage(*mask);
        } else {
            const fs::path file = fs::path(r.path).is_absolute() || image_root.empty()
                                      ? fs::path(r.path)
                                      : image_root / r.path;
            auto tile = io::read_rgb(file);
            if (!tile) throw IoError("cannot decode tile " + file.string());
            r.veg_coverage = coverage(exg_mask(*tile));
        }
    });
    return out;
}

}  // namespace agricurate
