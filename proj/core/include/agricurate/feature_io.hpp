#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace agricurate {

// Patch-grid features, row-major (row, col, channel).
struct FeatureTensor {
    std::uint32_t grid_h = 0;
    std::uint32_t grid_w = 0;
    std::uint32_t dim = 0;
    std::vector<float> values;
    std::string source;

    std::size_t patches() const noexcept { return std::size_t{grid_h} * grid_w; }
    std::span<const float> patch(std::size_t index) const noexcept {
        return {values.data() + index * dim, dim};
    }

    void validate() const;
};

// `.agft` layout, little-endian:
//   "AGFT" | u8 version=1 | u8 dtype=1 (f32) | u16 reserved=0 |
//   u32 grid_h | u32 grid_w | u32 dim | grid_h*grid_w*dim f32
inline constexpr std::uint8_t kAgftMagic[4] = {0x41, 0x47, 0x46, 0x54};
inline constexpr std::size_t kAgftHeaderSize = 20;

std::vector<std::uint8_t> encode_agft(const FeatureTensor& tensor);
FeatureTensor decode_agft(std::span<const std::uint8_t> bytes);

FeatureTensor read_agft(const std::filesystem::path& path);
void write_agft(const std::filesystem::path& path, const FeatureTensor& tensor);

// Mean over the patch grid.
std::vector<double> mean_pool(const FeatureTensor& tensor);

}  // namespace agricurate
