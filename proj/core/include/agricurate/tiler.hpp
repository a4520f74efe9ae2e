#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "agricurate/manifest.hpp"
#include "agricurate/raster.hpp"

namespace agricurate {

struct TileOffset {
    int x0 = 0;
    int y0 = 0;

    friend bool operator==(const TileOffset&, const TileOffset&) = default;
};

// floor(W/s) * floor(H/s) offsets, row-major from (0,0); partial strips on the
// right and bottom are dropped.
std::vector<TileOffset> tile_grid(int width, int height, int size);

Image crop(const Image& image, int x0, int y0, int width, int height);

std::vector<Image> extract_tiles(const Image& image, std::span<const TileOffset> offsets,
                                 int size);

// "<parent stem>__<x0>_<y0>", keeping any directory part of the parent id.
std::string tile_id(const std::string& parent_id, int x0, int y0);

struct TileStageResult {
    DatasetManifest tiles;
    std::size_t parents = 0;
    std::size_t skipped = 0;  // kept parents that failed to decode
};

// Tiles every kept record and writes `<out_dir>/<tile id>.png`. Output records
// are ordered by parent (manifest order) then row-major offset.
TileStageResult tile_manifest(const DatasetManifest& manifest,
                              const std::filesystem::path& image_root,
                              const std::filesystem::path& out_dir, int size, int workers = 1);

}  // namespace agricurate
