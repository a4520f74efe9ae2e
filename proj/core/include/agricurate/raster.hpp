#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "agricurate/error.hpp"

namespace agricurate {

// Interleaved row-major pixel buffer. Channel count is 3 (RGB) for images and
// 1 for masks.
template <typename T>
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, int channels, T fill = T{})
        : width_(width), height_(height), channels_(channels) {
        if (width < 0 || height < 0 || channels < 1) {
            throw DomainError("invalid raster dimensions");
        }
        data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * height_;
    }

    T& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
    const T& at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

    std::span<T> row(int y) noexcept {
        return {data_.data() + static_cast<std::size_t>(y) * width_ * channels_,
                static_cast<std::size_t>(width_) * channels_};
    }
    std::span<const T> row(int y) const noexcept {
        return {data_.data() + static_cast<std::size_t>(y) * width_ * channels_,
                static_cast<std::size_t>(width_) * channels_};
    }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }

    bool same_shape(const Raster& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t index(int x, int y, int c) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<T> data_;
};

using Image = Raster<std::uint8_t>;  // 3-channel RGB
using Mask = Raster<std::uint8_t>;   // 1-channel

inline Image make_rgb(int width, int height) { return Image(width, height, 3); }
inline Mask make_mask(int width, int height, std::uint8_t fill = 0) {
    return Mask(width, height, 1, fill);
}

}  // namespace agricurate
