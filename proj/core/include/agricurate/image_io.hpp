#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "agricurate/raster.hpp"

namespace agricurate::io {

// Decoding returns nullopt for unreadable or undecodable files so callers can
// flag the record instead of aborting a batch.
std::optional<Image> read_rgb(const std::filesystem::path& path);
std::optional<Mask> read_gray(const std::filesystem::path& path);

std::optional<Image> decode_rgb(std::span<const std::uint8_t> bytes);

// Lossless, deterministic PNG (fixed compression level); 1 or 3 channels.
void write_png(const std::filesystem::path& path, const Raster<std::uint8_t>& raster);

std::vector<std::uint8_t> encode_jpeg(const Image& image, int quality);
std::vector<std::uint8_t> encode_png(const Image& image);

void write_ppm(const std::filesystem::path& path, const Image& image);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

bool is_image_file(const std::filesystem::path& path);

// Sorted list of image files under `root`, recursive.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& root);

}  // namespace agricurate::io
