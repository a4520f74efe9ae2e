#include "fixture.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "agricurate/class_table.hpp"
#include "agricurate/error.hpp"
#include "agricurate/hashing.hpp"
#include "agricurate/image_io.hpp"
#include "agricurate/raster.hpp"
#include "agricurate/rng.hpp"

namespace agricurate::fixture {
namespace fs = std::filesystem;

namespace {

enum class Kind { clean, duplicate, blurry, dark };

struct Plant {
    double cx, cy, rx, ry, angle;
    std::uint8_t label;
};

struct Scene {
    Image image;
    Mask labels;
};

// Species colours, all clearly greener than soil.
constexpr std::uint8_t kPalette[4][3] = {{118, 88, 60}, {52, 150, 40}, {84, 168, 64}, {70, 132, 30}};

std::uint8_t clamp8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::vector<Plant> layout(Rng& rng, int width, int height) {
    const int n = 3 + static_cast<int>(rng.below(10));
    std::vector<Plant> plants;
    for (int i = 0; i < n; ++i) {
        Plant p;
        p.cx = rng.uniform() * width;
        p.cy = rng.uniform() * height;
        p.rx = 6.0 + rng.uniform() * 34.0;
        p.ry = 6.0 + rng.uniform() * 34.0;
        p.angle = rng.uniform() * 3.141592653589793;
        p.label = static_cast<std::uint8_t>(1 + rng.below(3));
        plants.push_back(p);
    }
    return plants;
}

Scene render(Rng& rng, int width, int height, Kind kind) {
    const auto plants = layout(rng, width, height);
    Scene s{make_rgb(width, height), make_mask(width, height, 0)};
    // A thin strip of unannotated pixels along the bottom edge on some images.
    const int ignore_rows = rng.below(3) == 0 ? 4 : 0;
    const double noise = kind == Kind::blurry ? 1.5 : 22.0;
    const double gain = kind == Kind::dark ? 0.15 : 1.0;

    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            std::uint8_t label = 0;
            for (const auto& p : plants) {
                const double dx = x - p.cx;
                const double dy = y - p.cy;
                const double c = std::cos(p.angle);
                const double sn = std::sin(p.angle);
                const double u = (dx * c + dy * sn) / p.rx;
                const double v = (-dx * sn + dy * c) / p.ry;
                if (u * u + v * v <= 1.0) label = p.label;
            }
            s.labels.at(x, y) = y >= height - ignore_rows ? kIgnoreValue : label;
            const double shared = (rng.uniform() - 0.5) * 2.0 * noise;
            for (int ch = 0; ch < 3; ++ch) {
                const double own = (rng.uniform() - 0.5) * noise * 0.5;
                s.image.at(x, y, ch) = clamp8(kPalette[label][ch] * gain + shared + own);
            }
        }
    }

    if (kind == Kind::blurry) {
        // 7x7 box blur, clamped borders.
        Image blurred = s.image;
        constexpr int r = 3;
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                for (int ch = 0; ch < 3; ++ch) {
                    int sum = 0;
                    for (int dy = -r; dy <= r; ++dy) {
                        for (int dx = -r; dx <= r; ++dx) {
                            sum += s.image.at(std::clamp(x + dx, 0, width - 1), std::clamp(y + dy, 0, height - 1), ch);
                        }
                    }
                    blurred.at(x, y, ch) = static_cast<std::uint8_t>((sum + 24) / 49);
                }
            }
        }
        s.image = std::move(blurred);
    }
    return s;
}

// Species predictions: the true mask with a few whole plants given the wrong
// species and speckle noise. Ignore pixels are predicted as soil.
Mask predict(Rng& rng, const Mask& truth) {
    Mask pred = truth;
    std::uint8_t swap_from = static_cast<std::uint8_t>(1 + rng.below(3));
    std::uint8_t swap_to = static_cast<std::uint8_t>(1 + rng.below(3));
    const bool swap = rng.below(3) == 0;
    for (int y = 0; y < pred.height(); ++y) {
        for (int x = 0; x < pred.width(); ++x) {
            auto& v = pred.at(x, y);
            if (v == kIgnoreValue) v = 0;
            if (swap && v == swap_from) v = swap_to;
            if (rng.below(50) == 0) v = static_cast<std::uint8_t>(rng.below(4));
        }
    }
    return pred;
}

Kind kind_of(int g, const FixtureSpec& spec) {
    // Spread the defects over both collections at fixed positions; every
    // duplicate follows a clean image in the same collection.
    const int n = static_cast<int>(spec.collections.size()) * spec.per_collection;
    auto positions = [n](int count, int offset) {
        std::set<int> out;
        for (int k = 0; k < count; ++k) out.insert((offset + k * n / std::max(count, 1)) % n);
        return out;
    };
    if (positions(spec.dark, 3).count(g)) return Kind::dark;
    if (positions(spec.blurry, 6).count(g)) return Kind::blurry;
    if (g % spec.per_collection != 0 && positions(spec.duplicates, 9).count(g)) return Kind::duplicate;
    return Kind::clean;
}

void write_text(const fs::path& file, const std::string& text) {
    io::write_file_bytes(file, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                                             text.size()));
}

}  // namespace

FixtureSummary write_fixture(const fs::path& root, const FixtureSpec& spec) {
    if (spec.width < 8 || spec.height < 8 || spec.per_collection < 1) {
        throw ConfigError("fixture dimensions too small");
    }
    FixtureSummary summary;
    nlohmann::ordered_json classes = {
        {"classes", {"soil", "amaranthus", "chenopodium", "setaria"}}, {"background", 0}, {"ignore_value", 255}};
    write_text(root / "classes.json", classes.dump(2) + "\n");

    for (std::size_t c = 0; c < spec.collections.size(); ++c) {
        const std::string& collection = spec.collections[c];
        fs::path previous;
        for (int i = 0; i < spec.per_collection; ++i) {
            const int g = static_cast<int>(c) * spec.per_collection + i;
            char stem[32];
            std::snprintf(stem, sizeof stem, "img_%03d", i);
            const fs::path rel = fs::path(collection) / stem;
            const fs::path image = root / "images" / rel;
            const fs::path labels = root / "labels" / rel;
            const fs::path pred = root / "pred" / rel;

            Kind kind = kind_of(g, spec);
            if (kind == Kind::duplicate && previous.empty()) kind = Kind::clean;
            ++summary.images;
            if (kind == Kind::duplicate) {
                ++summary.duplicates;
                for (const char* sub : {"images", "labels", "pred"}) {
                    const char* ext = std::string(sub) == "images" ? ".ppm" : ".png";
                    const auto bytes = io::read_file_bytes(root / sub / (previous.string() + ext));
                    io::write_file_bytes(root / sub / (rel.string() + ext), bytes);
                }
                continue;
            }
            if (kind == Kind::blurry) ++summary.blurry;
            if (kind == Kind::dark) ++summary.dark;

            Rng rng(Rng::derive(spec.seed, static_cast<std::uint64_t>(g)));
            const Scene scene = render(rng, spec.width, spec.height, kind);
            io::write_ppm(image.string() + ".ppm", scene.image);
            io::write_png(labels.string() + ".png", scene.labels);
            io::write_png(pred.string() + ".png", predict(rng, scene.labels));
            if (kind == Kind::clean) previous = rel;
        }
    }
    return summary;
}

}  // namespace agricurate::fixture
