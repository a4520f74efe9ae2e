#include "agricurate/weights.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "agricurate/error.hpp"

namespace agricurate {

double effective_number(std::uint64_t n, double beta) {
    if (!(beta >= 0.0 && beta < 1.0)) {
        throw DomainError("effective_number needs 0 <= beta < 1");
    }
    if (n == 0) return 0.0;
    if (beta == 0.0) return 1.0;
    // 1 - beta^n without cancellation
    return -std::expm1(static_cast<double>(n) * std::log(beta)) / (1.0 - beta);
}

std::string_view to_string(WeightNormalization normalization) noexcept {
    switch (normalization) {
        case WeightNormalization::mean_one: return "mean_one";
        case WeightNormalization::sum_one: return "sum_one";
        case WeightNormalization::none: return "none";
    }
    return "mean_one";
}

WeightNormalization parse_normalization(std::string_view text) {
    for (auto n : {WeightNormalization::mean_one, WeightNormalization::sum_one,
                   WeightNormalization::none}) {
        if (to_string(n) == text) return n;
    }
    throw ConfigError("unknown weight normalization `" + std::string(text) + "`");
}

ClassWeights class_weights(const ClassPixelCounts& counts, double beta,
                           WeightNormalization normalization) {
    if (!(beta >= 0.0 && beta < 1.0)) throw DomainError("class_weights needs 0 <= beta < 1");
    ClassWeights out;
    out.beta = beta;
    out.normalization = normalization;
    out.pixel_counts = counts.counts;

    double sum = 0.0;
    std::size_t present = 0;
    for (const auto& [name, n] : counts.counts) {
        const double w = n == 0 ? 0.0 : 1.0 / effective_number(n, beta);
        out.weights[name] = w;
        if (n > 0) {
            sum += w;
            ++present;
        }
    }
    if (present == 0) throw DomainError("class_weights: every class has zero pixels");

    double scale = 1.0;
    if (normalization == WeightNormalization::mean_one) {
        scale = static_cast<double>(present) / sum;
    } else if (normalization == WeightNormalization::sum_one) {
        scale = 1.0 / sum;
    }
    for (auto& [_, w] : out.weights) w *= scale;
    return out;
}

void tally_pixels(const Mask& mask, const ClassTable& table, ClassPixelCounts& counts) {
    std::vector<std::uint64_t> per_index(table.size(), 0);
    for (std::uint8_t v : mask.data()) {
        if (v == table.ignore_value) continue;
        if (v >= table.size()) {
            throw DomainError("label value " + std::to_string(v) + " not in class table");
        }
        ++per_index[v];
    }
    for (std::size_t i = 0; i < table.size(); ++i) {
        counts.counts[table.name_of(static_cast<std::uint8_t>(i))] += per_index[i];
    }
}

std::string serialize_weights(const ClassWeights& weights) {
    nlohmann::ordered_json j;
    j["beta"] = weights.beta;
    j["normalization"] = to_string(weights.normalization);
    j["weights"] = nlohmann::ordered_json::object();
    for (const auto& [name, w] : weights.weights) j["weights"][name] = w;
    j["pixel_counts"] = nlohmann::ordered_json::object();
    for (const auto& [name, n] : weights.pixel_counts) j["pixel_counts"][name] = n;
    return j.dump(2) + "\n";
}

ClassPixelCounts load_pixel_counts(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("pixel counts: ") + e.what());
    }
    const nlohmann::json& map = j.contains("pixel_counts") ? j.at("pixel_counts") : j;
    if (!map.is_object()) throw ParseError("pixel counts must be a JSON object");
    ClassPixelCounts counts;
    for (const auto& [name, value] : map.items()) {
        if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
            throw ParseError("pixel count for `" + name + "` must be a nonnegative integer");
        }
        counts.counts[name] = value.get<std::uint64_t>();
    }
    return counts;
}

}  // namespace agricurate
