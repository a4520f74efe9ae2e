#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace agricurate::fixture {

// Synthetic field imagery for end-to-end runs. Layout under `root`:
//   images/<collection>/<name>.ppm   RGB scenes
//   labels/<collection>/<name>.png   species masks (0 soil, 1..3 species, 255 ignore)
//   pred/<collection>/<name>.png     imperfect predictions of the species masks
//   classes.json
struct FixtureSpec {
    std::vector<std::string> collections = {"2019A2", "2020B1"};
    int per_collection = 25;
    int width = 384;
    int height = 256;
    // Counts over the whole fixture; each kind gets its own scene layout.
    int duplicates = 5;
    int blurry = 5;
    int dark = 5;
    std::uint64_t seed = 7;
};

struct FixtureSummary {
    std::size_t images = 0;
    std::size_t duplicates = 0;
    std::size_t blurry = 0;
    std::size_t dark = 0;
    std::size_t clean() const { return images - duplicates - blurry - dark; }
};

FixtureSummary write_fixture(const std::filesystem::path& root, const FixtureSpec& spec = {});

}  // namespace agricurate::fixture
