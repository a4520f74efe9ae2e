#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agricurate/raster.hpp"

namespace agricurate {

inline constexpr std::uint8_t kIgnoreValue = 255;

// Class index -> name. Index 0 is background unless configured otherwise.
struct ClassTable {
    std::vector<std::string> names;
    std::optional<std::uint8_t> background = std::uint8_t{0};
    std::uint8_t ignore_value = kIgnoreValue;

    std::size_t size() const noexcept { return names.size(); }
    std::optional<std::uint8_t> find(std::string_view name) const noexcept;
    // Name for an index; decimal index for unnamed entries.
    std::string name_of(std::uint8_t index) const;

    friend bool operator==(const ClassTable&, const ClassTable&) = default;
};

// JSON: {"classes": ["soil", "ZEAMX", ...], "background": 0, "ignore_value": 255}
// or a bare array of names.
ClassTable load_class_table(const std::filesystem::path& path);
ClassTable parse_class_table(std::string_view json_text);

struct LabelMask {
    Mask raster;
    ClassTable table;

    int width() const noexcept { return raster.width(); }
    int height() const noexcept { return raster.height(); }

    // Every non-ignore value indexes the class table.
    void validate() const;
};

}  // namespace agricurate
