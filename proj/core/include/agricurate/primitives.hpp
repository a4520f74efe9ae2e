#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "agricurate/class_table.hpp"
#include "agricurate/raster.hpp"

namespace agricurate {

enum class Connectivity { four = 4, eight = 8 };

struct BoundingBox {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Blob {
    std::uint8_t label = 0;
    std::size_t area = 0;
    BoundingBox bbox;
    std::size_t first_pixel = 0;  // scan-order index of the first pixel

    friend bool operator==(const Blob&, const Blob&) = default;
};

// Maximal connected sets of equal-valued pixels, skipping ignore and
// background values. Sorted by (y0, x0, label, first_pixel).
std::vector<Blob> connected_components(const LabelMask& mask, Connectivity connectivity);

struct Primitive {
    std::string parent_id;
    BoundingBox bbox;  // blob bounds
    BoundingBox crop;  // bbox grown by padding, clamped to the image
    std::string label;
    std::size_t area = 0;
};

struct PrimitiveCrop {
    Primitive primitive;
    Image raster;
};

struct PrimitiveOptions {
    std::size_t min_area = 64;
    int padding = 8;
    Connectivity connectivity = Connectivity::eight;
};

std::vector<PrimitiveCrop> extract_primitives(const std::string& parent_id, const Image& image,
                                              const LabelMask& mask,
                                              const PrimitiveOptions& options = {});

// "<parent_id>__<label>__<x0>_<y0>" (blob bbox origin).
std::string primitive_name(const Primitive& primitive);

struct PrimitiveStageResult {
    std::vector<Primitive> primitives;
    std::vector<std::string> files;  // relative to out_dir, parallel to primitives
    std::size_t images = 0;
    std::size_t missing_masks = 0;
};

// Pairs each image under `image_dir` with `<mask_dir>/<relative stem>.png`,
// writes crops under `out_dir` and returns the index rows.
PrimitiveStageResult extract_primitive_dataset(const std::filesystem::path& image_dir,
                                               const std::filesystem::path& mask_dir,
                                               const ClassTable& table,
                                               const PrimitiveOptions& options,
                                               const std::filesystem::path& out_dir,
                                               int workers = 1);

std::string serialize_primitive_index(const PrimitiveStageResult& result);

}  // namespace agricurate
