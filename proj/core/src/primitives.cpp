#include "agricurate/primitives.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

#include <nlohmann/json.hpp>

#include "agricurate/error.hpp"
#include "agricurate/image_io.hpp"
#include "agricurate/manifest.hpp"
#include "agricurate/parallel.hpp"
#include "agricurate/tiler.hpp"

namespace agricurate {
namespace fs = std::filesystem;

namespace {

class DisjointSet {
public:
    std::uint32_t make() {
        parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
        return parent_.back();
    }
    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) std::swap(a, b);
        parent_[a] = b;  // smaller provisional label is the root
    }
    std::size_t size() const noexcept { return parent_.size(); }

private:
    std::vector<std::uint32_t> parent_;
};

}  // namespace

std::vector<Blob> connected_components(const LabelMask& mask, Connectivity connectivity) {
    const Mask& m = mask.raster;
    const int w = m.width();
    const int h = m.height();
    const auto skip = [&](std::uint8_t v) {
        return v == mask.table.ignore_value || (mask.table.background && v == *mask.table.background);
    };

    constexpr std::uint32_t kNone = ~std::uint32_t{0};
    std::vector<std::uint32_t> labels(m.pixel_count(), kNone);
    DisjointSet sets;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::uint8_t v = m.at(x, y);
            if (skip(v)) continue;
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            std::uint32_t assigned = kNone;
            auto visit = [&](int nx, int ny) {
                if (nx < 0 || nx >= w || ny < 0) return;
                if (m.at(nx, ny) != v) return;
                const std::uint32_t other = labels[static_cast<std::size_t>(ny) * w + nx];
                if (assigned == kNone) {
                    assigned = other;
                } else {
                    sets.unite(assigned, other);
                }
            };
            visit(x - 1, y);
            visit(x, y - 1);
            if (connectivity == Connectivity::eight) {
                visit(x - 1, y - 1);
                visit(x + 1, y - 1);
            }
            labels[idx] = assigned == kNone ? sets.make() : assigned;
        }
    }

    std::map<std::uint32_t, Blob> blobs;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (labels[idx] == kNone) continue;
            const std::uint32_t root = sets.find(labels[idx]);
            auto [it, inserted] = blobs.try_emplace(root);
            Blob& b = it->second;
            if (inserted) {
                b.label = m.at(x, y);
                b.first_pixel = idx;
                b.bbox = {x, y, 1, 1};
            } else {
                const int x1 = std::max(b.bbox.x0 + b.bbox.width, x + 1);
                const int y1 = std::max(b.bbox.y0 + b.bbox.height, y + 1);
                b.bbox.x0 = std::min(b.bbox.x0, x);
                b.bbox.width = x1 - b.bbox.x0;
                b.bbox.height = y1 - b.bbox.y0;
            }
            ++b.area;
        }
    }

    std::vector<Blob> out;
    out.reserve(blobs.size());
    for (auto& [_, b] : blobs) out.push_back(b);
    std::sort(out.begin(), out.end(), [](const Blob& a, const Blob& b) {
        return std::tie(a.bbox.y0, a.bbox.x0, a.label, a.first_pixel) <
               std::tie(b.bbox.y0, b.bbox.x0, b.label, b.first_pixel);
    });
    return out;
}

std::vector<PrimitiveCrop> extract_primitives(const std::string& parent_id, const Image& image,
                                              const LabelMask& mask,
                                              const PrimitiveOptions& options) {
    if (image.width() != mask.width() || image.height() != mask.height()) {
        throw DomainError("image and mask dimensions differ for `" + parent_id + "`");
    }
    if (options.padding < 0) throw DomainError("padding must be >= 0");
    std::vector<PrimitiveCrop> crops;
    for (const Blob& blob : connected_components(mask, options.connectivity)) {
        if (blob.area < options.min_area) continue;
        Primitive p;
        p.parent_id = parent_id;
        p.bbox = blob.bbox;
        p.label = mask.table.name_of(blob.label);
        p.area = blob.area;
        const int x0 = std::max(0, blob.bbox.x0 - options.padding);
        const int y0 = std::max(0, blob.bbox.y0 - options.padding);
        const int x1 = std::min(image.width(), blob.bbox.x0 + blob.bbox.width + options.padding);
        const int y1 = std::min(image.height(), blob.bbox.y0 + blob.bbox.height + options.padding);
        p.crop = {x0, y0, x1 - x0, y1 - y0};
        crops.push_back({p, crop(image, x0, y0, x1 - x0, y1 - y0)});
    }
    return crops;
}

std::string primitive_name(const Primitive& primitive) {
    const fs::path parent(primitive.parent_id);
    const std::string stem = (parent.parent_path() / parent.stem()).generic_string();
    return stem + "__" + primitive.label + "__" + std::to_string(primitive.bbox.x0) + "_" +
           std::to_string(primitive.bbox.y0);
}

PrimitiveStageResult extract_primitive_dataset(const fs::path& image_dir, const fs::path& mask_dir,
                                               const ClassTable& table,
                                               const PrimitiveOptions& options,
                                               const fs::path& out_dir, int workers) {
    const auto images = io::list_images(image_dir);
    struct PerImage {
        std::vector<Primitive> primitives;
        std::vector<std::string> files;
        bool missing = false;
    };
    std::vector<PerImage> results(images.size());

    parallel_for(images.size(), workers, [&](std::size_t i) {
        const fs::path relative = images[i].lexically_relative(image_dir);
        const std::string parent_id = normalize_id(relative);
        const fs::path mask_path = mask_dir / relative.parent_path() / (relative.stem().string() + ".png");
        auto raster = io::read_gray(mask_path);
        if (!raster) {
            results[i].missing = true;
            return;
        }
        auto image = io::read_rgb(images[i]);
        if (!image) throw IoError("cannot decode " + images[i].string());
        LabelMask mask{std::move(*raster), table};
        mask.validate();

        std::map<std::string, int> used;
        for (auto& [primitive, pixels] : extract_primitives(parent_id, *image, mask, options)) {
            std::string name = primitive_name(primitive);
            if (const int n = used[name]++; n > 0) name += "-" + std::to_string(n);
            const std::string file = name + ".png";
            io::write_png(out_dir / file, pixels);
            results[i].primitives.push_back(std::move(primitive));
            results[i].files.push_back(file);
        }
    });

    PrimitiveStageResult out;
    out.images = images.size();
    for (auto& r : results) {
        if (r.missing) ++out.missing_masks;
        for (std::size_t k = 0; k < r.primitives.size(); ++k) {
            out.primitives.push_back(std::move(r.primitives[k]));
            out.files.push_back(std::move(r.files[k]));
        }
    }
    return out;
}

std::string serialize_primitive_index(const PrimitiveStageResult& result) {
    std::string out;
    for (std::size_t i = 0; i < result.primitives.size(); ++i) {
        const Primitive& p = result.primitives[i];
        nlohmann::ordered_json j;
        j["file"] = result.files[i];
        j["parent_id"] = p.parent_id;
        j["label"] = p.label;
        j["bbox"] = {p.bbox.x0, p.bbox.y0, p.bbox.width, p.bbox.height};
        j["crop"] = {p.crop.x0, p.crop.y0, p.crop.width, p.crop.height};
        j["area"] = p.area;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace agricurate
