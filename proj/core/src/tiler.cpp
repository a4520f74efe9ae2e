#include "agricurate/tiler.hpp"

#include <algorithm>
#include <cstring>

#include "agricurate/error.hpp"
#include "agricurate/hashing.hpp"
#include "agricurate/image_io.hpp"
#include "agricurate/parallel.hpp"

namespace agricurate {
namespace fs = std::filesystem;

std::vector<TileOffset> tile_grid(int width, int height, int size) {
    if (size < 1) throw DomainError("tile size must be >= 1");
    std::vector<TileOffset> offsets;
    if (width < size || height < size) return offsets;
    const int cols = width / size;
    const int rows = height / size;
    offsets.reserve(static_cast<std::size_t>(cols) * rows);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) offsets.push_back({c * size, r * size});
    }
    return offsets;
}

Image crop(const Image& image, int x0, int y0, int width, int height) {
    if (x0 < 0 || y0 < 0 || width < 0 || height < 0 || x0 + width > image.width() ||
        y0 + height > image.height()) {
        throw DomainError("crop window (" + std::to_string(x0) + "," + std::to_string(y0) + "," +
                          std::to_string(width) + "," + std::to_string(height) +
                          ") outside the image");
    }
    const int ch = image.channels();
    Image out(width, height, ch);
    const std::size_t row_bytes = static_cast<std::size_t>(width) * ch;
    for (int y = 0; y < height; ++y) {
        std::memcpy(out.row(y).data(), image.row(y0 + y).data() + static_cast<std::size_t>(x0) * ch,
                    row_bytes);
    }
    return out;
}

std::vector<Image> extract_tiles(const Image& image, std::span<const TileOffset> offsets,
                                 int size) {
    if (size < 1) throw DomainError("tile size must be >= 1");
    std::vector<Image> tiles;
    tiles.reserve(offsets.size());
    for (const auto& o : offsets) {
        if (o.x0 % size != 0 || o.y0 % size != 0) {
            throw DomainError("tile offset (" + std::to_string(o.x0) + "," + std::to_string(o.y0) +
                              ") is not a multiple of " + std::to_string(size));
        }
        tiles.push_back(crop(image, o.x0, o.y0, size, size));
    }
    return tiles;
}

std::string tile_id(const std::string& parent_id, int x0, int y0) {
    const fs::path parent(parent_id);
    const std::string stem = (parent.parent_path() / parent.stem()).generic_string();
    return stem + "__" + std::to_string(x0) + "_" + std::to_string(y0);
}

TileStageResult tile_manifest(const DatasetManifest& manifest, const fs::path& image_root,
                              const fs::path& out_dir, int size, int workers) {
    if (size < 1) throw DomainError("tile size must be >= 1");
    std::vector<const ImageRecord*> parents;
    for (const auto& r : manifest.records) {
        if (r.kept()) parents.push_back(&r);
    }

    std::vector<std::vector<ImageRecord>> per_parent(parents.size());
    std::vector<char> failed(parents.size(), 0);
    parallel_for(parents.size(), workers, [&](std::size_t i) {
        const ImageRecord& parent = *parents[i];
        const fs::path src = fs::path(parent.path).is_absolute() || image_root.empty()
                                 ? fs::path(parent.path)
                                 : image_root / parent.path;
        auto image = io::read_rgb(src);
        if (!image) {
            failed[i] = 1;
            return;
        }
        const auto offsets = tile_grid(image->width(), image->height(), size);
        for (const auto& o : offsets) {
            const Image tile = crop(*image, o.x0, o.y0, size, size);
            const std::string id = tile_id(parent.id, o.x0, o.y0);
            const std::string file = id + ".png";
            const auto bytes = io::encode_png(tile);
            io::write_file_bytes(out_dir / file, bytes);

            ImageRecord t;
            t.id = id;
            t.path = file;
            t.sha256 = sha256_hex(bytes);
            t.width = size;
            t.height = size;
            t.collection = parent.collection;
            t.split = parent.split;
            t.status = Status::kept;
            t.parent_id = parent.id;
            t.x0 = o.x0;
            t.y0 = o.y0;
            t.size = size;
            per_parent[i].push_back(std::move(t));
        }
    });

    TileStageResult result;
    result.parents = parents.size();
    for (std::size_t i = 0; i < parents.size(); ++i) {
        if (failed[i]) ++result.skipped;
        for (auto& t : per_parent[i]) result.tiles.records.push_back(std::move(t));
    }
    return result;
}

}  // namespace agricurate
