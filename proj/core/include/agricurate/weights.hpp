#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "agricurate/class_table.hpp"

namespace agricurate {

// Effective number of samples E_n = (1 - beta^n) / (1 - beta), with E_0 = 0.
double effective_number(std::uint64_t n, double beta);

enum class WeightNormalization { mean_one, sum_one, none };

std::string_view to_string(WeightNormalization normalization) noexcept;
WeightNormalization parse_normalization(std::string_view text);

struct ClassPixelCounts {
    std::map<std::string, std::uint64_t> counts;
};

struct ClassWeights {
    double beta = 0.99;
    WeightNormalization normalization = WeightNormalization::mean_one;
    std::map<std::string, double> weights;
    std::map<std::string, std::uint64_t> pixel_counts;
};

// weight_c proportional to 1 / E_{n_c}; classes with n_c = 0 get weight 0 and
// are left out of the normalization.
ClassWeights class_weights(const ClassPixelCounts& counts, double beta,
                           WeightNormalization normalization = WeightNormalization::mean_one);

// Pixel counts per named class over a mask set; ignore pixels are skipped.
void tally_pixels(const Mask& mask, const ClassTable& table, ClassPixelCounts& counts);

std::string serialize_weights(const ClassWeights& weights);

// Reads a class-name -> pixel-count map from either a weights file
// ("pixel_counts" member) or a bare JSON object.
ClassPixelCounts load_pixel_counts(std::string_view json_text);

}  // namespace agricurate
