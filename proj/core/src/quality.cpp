#include "agricurate/quality.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include "agricurate/error.hpp"
#include "agricurate/hashing.hpp"
#include "agricurate/image_io.hpp"
#include "agricurate/parallel.hpp"

namespace agricurate {
namespace fs = std::filesystem;

void QualityConfig::validate() const {
    if (!(blur_threshold >= 0.0)) throw ConfigError("blur threshold must be >= 0");
    if (!(dark_threshold >= 0.0 && dark_threshold <= 255.0)) {
        throw ConfigError("dark threshold must lie in [0,255]");
    }
    if (phash_distance < 0 || phash_distance > 64) {
        throw ConfigError("phash distance must lie in [0,64]");
    }
}

Raster<double> to_luma(const Image& image) {
    Raster<double> out(image.width(), image.height(), 1);
    for (int y = 0; y < image.height(); ++y) {
        auto src = image.row(y);
        auto dst = out.row(y);
        for (int x = 0; x < image.width(); ++x) {
            dst[x] = luma(src[3 * x], src[3 * x + 1], src[3 * x + 2]);
        }
    }
    return out;
}

double blur_score(const Image& image) {
    if (image.width() < 3 || image.height() < 3) {
        throw DomainError("blur_score needs an image of at least 3x3 pixels");
    }
    const Raster<double> gray = to_luma(image);
    const int w = gray.width();
    const int h = gray.height();
    std::vector<double> response;
    response.reserve(static_cast<std::size_t>(w - 2) * (h - 2));
    for (int y = 1; y < h - 1; ++y) {
        auto up = gray.row(y - 1);
        auto mid = gray.row(y);
        auto down = gray.row(y + 1);
        for (int x = 1; x < w - 1; ++x) {
            response.push_back(up[x] + down[x] + mid[x - 1] + mid[x + 1] - 4.0 * mid[x]);
        }
    }
    const double n = static_cast<double>(response.size());
    const double mean = std::accumulate(response.begin(), response.end(), 0.0) / n;
    double ss = 0.0;
    for (double r : response) ss += (r - mean) * (r - mean);
    return ss / n;
}

double mean_luma(const Image& image) {
    if (image.empty()) throw DomainError("mean_luma of an empty image");
    double sum = 0.0;
    for (int y = 0; y < image.height(); ++y) {
        auto row = image.row(y);
        double row_sum = 0.0;
        for (int x = 0; x < image.width(); ++x) {
            row_sum += luma(row[3 * x], row[3 * x + 1], row[3 * x + 2]);
        }
        sum += row_sum;
    }
    return std::clamp(sum / static_cast<double>(image.pixel_count()), 0.0, 255.0);
}

namespace {

// Sparse 1-D area-average weights: out[o] = sum_i weight * in[i]. Intervals are
// measured in units of 1/out (source) so overlaps are exact integers.
struct AreaTap {
    int first = 0;
    std::vector<double> weights;
};

std::vector<AreaTap> area_taps(int in, int out) {
    std::vector<AreaTap> taps(static_cast<std::size_t>(out));
    const std::int64_t span = in;  // source length of one output cell, scaled by out
    for (int o = 0; o < out; ++o) {
        const std::int64_t lo = std::int64_t{o} * in;
        const std::int64_t hi = lo + span;
        const int first = static_cast<int>(lo / out);
        const int last = static_cast<int>((hi - 1) / out);
        AreaTap& tap = taps[static_cast<std::size_t>(o)];
        tap.first = first;
        for (int i = first; i <= last; ++i) {
            const std::int64_t a = std::max(lo, std::int64_t{i} * out);
            const std::int64_t b = std::min(hi, std::int64_t{i + 1} * out);
            tap.weights.push_back(static_cast<double>(b - a) / static_cast<double>(span));
        }
    }
    return taps;
}

}  // namespace

Raster<double> resize_area(const Raster<double>& plane, int out_width, int out_height) {
    if (plane.empty() || out_width < 1 || out_height < 1) {
        throw DomainError("resize_area needs a nonempty plane and output");
    }
    const auto xtaps = area_taps(plane.width(), out_width);
    const auto ytaps = area_taps(plane.height(), out_height);

    Raster<double> horizontal(out_width, plane.height(), 1);
    for (int y = 0; y < plane.height(); ++y) {
        auto src = plane.row(y);
        auto dst = horizontal.row(y);
        for (int o = 0; o < out_width; ++o) {
            const AreaTap& tap = xtaps[static_cast<std::size_t>(o)];
            double acc = 0.0;
            for (std::size_t k = 0; k < tap.weights.size(); ++k) {
                acc += tap.weights[k] * src[static_cast<std::size_t>(tap.first) + k];
            }
            dst[o] = acc;
        }
    }
    Raster<double> out(out_width, out_height, 1);
    for (int o = 0; o < out_height; ++o) {
        const AreaTap& tap = ytaps[static_cast<std::size_t>(o)];
        auto dst = out.row(o);
        for (std::size_t k = 0; k < tap.weights.size(); ++k) {
            auto src = horizontal.row(tap.first + static_cast<int>(k));
            for (int x = 0; x < out_width; ++x) dst[x] += tap.weights[k] * src[x];
        }
    }
    return out;
}

Raster<double> dct2(const Raster<double>& plane) {
    const int n = plane.width();
    if (n < 1 || plane.height() != n) throw DomainError("dct2 needs a square plane");
    std::vector<double> basis(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
        const double alpha = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        for (int i = 0; i < n; ++i) {
            basis[static_cast<std::size_t>(k) * n + i] =
                alpha * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
        }
    }
    // rows: tmp(y, v) = sum_x f(y, x) basis(v, x)
    Raster<double> tmp(n, n, 1);
    for (int y = 0; y < n; ++y) {
        auto src = plane.row(y);
        for (int v = 0; v < n; ++v) {
            double acc = 0.0;
            for (int x = 0; x < n; ++x) acc += src[x] * basis[static_cast<std::size_t>(v) * n + x];
            tmp.at(v, y) = acc;
        }
    }
    // columns: out(u, v) = sum_y basis(u, y) tmp(y, v)
    Raster<double> out(n, n, 1);
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            double acc = 0.0;
            for (int y = 0; y < n; ++y) acc += basis[static_cast<std::size_t>(u) * n + y] * tmp.at(v, y);
            out.at(v, u) = acc;
        }
    }
    return out;
}

std::uint64_t phash64(const Image& image) {
    if (image.empty()) throw DomainError("phash64 of an empty image");
    const Raster<double> small = resize_area(to_luma(image), 32, 32);
    const Raster<double> freq = dct2(small);

    std::array<double, 64> coeffs{};
    std::size_t k = 0;
    for (int u = 0; u < 8; ++u) {
        for (int v = 0; v < 8; ++v) {
            if (u == 0 && v == 0) continue;
            coeffs[k++] = freq.at(v, u);
        }
    }
    coeffs[k] = freq.at(0, 8);

    std::array<double, 64> sorted = coeffs;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[31] + sorted[32]);

    std::uint64_t hash = 0;
    for (std::size_t i = 0; i < 64; ++i) {
        if (coeffs[i] > median) hash |= std::uint64_t{1} << (63 - i);
    }
    return hash;
}

CurateStats curate_stats(const DatasetManifest& manifest) {
    CurateStats s;
    s.total = manifest.size();
    s.kept = manifest.count(Status::kept);
    s.duplicate = manifest.count(Status::duplicate);
    s.near_duplicate = manifest.count(Status::near_duplicate);
    s.blurry = manifest.count(Status::blurry);
    s.dark = manifest.count(Status::dark);
    s.decode_failed = manifest.count(Status::decode_failed);
    return s;
}

namespace {

fs::path resolve(const fs::path& root, const std::string& path) {
    const fs::path p(path);
    return p.is_absolute() || root.empty() ? p : root / p;
}

// Scores one record in place; returns false if the image could not be used.
bool score(ImageRecord& r, const fs::path& file) {
    std::vector<std::uint8_t> bytes;
    try {
        bytes = io::read_file_bytes(file);
    } catch (const IoError&) {
        return false;
    }
    r.sha256 = sha256_hex(bytes);
    auto image = io::decode_rgb(bytes);
    if (!image) return false;
    r.width = image->width();
    r.height = image->height();
    // below 3x3 there is no Laplacian response; treat as no detail
    r.blur_var = image->width() >= 3 && image->height() >= 3 ? blur_score(*image) : 0.0;
    r.mean_luma = mean_luma(*image);
    r.phash = phash64(*image);
    return true;
}

// Exact radius search over 64-bit hashes. With d+1 disjoint bit chunks, two
// hashes within Hamming distance d agree exactly on at least one chunk, so
// chunk-keyed buckets return every true neighbour.
class HashIndex {
public:
    explicit HashIndex(int radius) : radius_(radius) {
        const int chunks = radius + 1;
        linear_ = chunks > 16;
        if (!linear_) {
            for (int c = 0; c < chunks; ++c) {
                const int lo = c * 64 / chunks;
                const int hi = (c + 1) * 64 / chunks;
                bounds_.emplace_back(lo, hi);
            }
            tables_.resize(bounds_.size());
        }
    }

    bool has_neighbour(std::uint64_t hash) const {
        if (linear_) {
            return std::any_of(hashes_.begin(), hashes_.end(),
                               [&](std::uint64_t h) { return hamming(h, hash) <= radius_; });
        }
        for (std::size_t c = 0; c < bounds_.size(); ++c) {
            auto it = tables_[c].find(chunk(hash, c));
            if (it == tables_[c].end()) continue;
            for (std::size_t idx : it->second) {
                if (hamming(hashes_[idx], hash) <= radius_) return true;
            }
        }
        return false;
    }

    void insert(std::uint64_t hash) {
        const std::size_t idx = hashes_.size();
        hashes_.push_back(hash);
        if (linear_) return;
        for (std::size_t c = 0; c < bounds_.size(); ++c) tables_[c][chunk(hash, c)].push_back(idx);
    }

private:
    std::uint64_t chunk(std::uint64_t hash, std::size_t c) const noexcept {
        const auto [lo, hi] = bounds_[c];
        const int width = hi - lo;
        const std::uint64_t mask = width == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
        return (hash >> lo) & mask;
    }

    int radius_;
    bool linear_ = false;
    std::vector<std::pair<int, int>> bounds_;
    std::vector<std::unordered_map<std::uint64_t, std::vector<std::size_t>>> tables_;
    std::vector<std::uint64_t> hashes_;
};

}  // namespace

DatasetManifest curate(const DatasetManifest& manifest, const fs::path& image_root,
                       const QualityConfig& config, int workers) {
    config.validate();
    DatasetManifest out = manifest;
    const std::size_t n = out.records.size();
    std::vector<char> usable(n, 0);

    parallel_for(n, workers, [&](std::size_t i) {
        ImageRecord& r = out.records[i];
        r.blur_var.reset();
        r.mean_luma.reset();
        r.phash.reset();
        usable[i] = score(r, resolve(image_root, r.path)) ? 1 : 0;
    });

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& pa = out.records[a].path;
        const auto& pb = out.records[b].path;
        return pa != pb ? pa < pb : out.records[a].id < out.records[b].id;
    });

    std::unordered_map<std::string, std::size_t> first_by_digest;
    HashIndex index(config.phash_distance);
    for (std::size_t i : order) {
        ImageRecord& r = out.records[i];
        if (!usable[i]) {
            r.status = Status::decode_failed;
            continue;
        }
        if (!first_by_digest.emplace(r.sha256, i).second) {
            r.status = Status::duplicate;
            continue;
        }
        if (index.has_neighbour(*r.phash)) {
            r.status = Status::near_duplicate;
            continue;
        }
        index.insert(*r.phash);
        if (*r.blur_var < config.blur_threshold) {
            r.status = Status::blurry;
        } else if (*r.mean_luma < config.dark_threshold) {
            r.status = Status::dark;
        } else {
            r.status = Status::kept;
        }
    }
    return out;
}

DatasetManifest scan_images(const fs::path& root, int workers) {
    const auto files = io::list_images(root);
    DatasetManifest manifest;
    manifest.records.resize(files.size());
    parallel_for(files.size(), workers, [&](std::size_t i) {
        const fs::path relative = files[i].lexically_relative(root);
        ImageRecord& r = manifest.records[i];
        r.id = normalize_id(relative);
        r.path = r.id;
        auto begin = relative.begin();
        r.collection = std::next(begin) != relative.end() ? begin->string() : std::string();
        const auto bytes = io::read_file_bytes(files[i]);
        r.sha256 = sha256_hex(bytes);
        if (auto image = io::decode_rgb(bytes)) {
            r.width = image->width();
            r.height = image->height();
        } else {
            r.width = 1;
            r.height = 1;
            r.status = Status::decode_failed;
        }
    });
    return manifest;
}

}  // namespace agricurate
