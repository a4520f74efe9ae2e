#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agricurate/class_table.hpp"
#include "agricurate/manifest.hpp"
#include "agricurate/weights.hpp"

namespace agricurate {

class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(ClassTable table);

    std::size_t classes() const noexcept { return table_.size(); }
    const ClassTable& table() const noexcept { return table_; }

    // Row = ground truth, column = prediction.
    std::uint64_t operator()(std::size_t gt, std::size_t pred) const noexcept {
        return counts_[gt * classes() + pred];
    }
    std::uint64_t& operator()(std::size_t gt, std::size_t pred) noexcept {
        return counts_[gt * classes() + pred];
    }

    std::uint64_t total() const noexcept;
    std::uint64_t row_sum(std::size_t c) const noexcept;
    std::uint64_t col_sum(std::size_t c) const noexcept;

    ConfusionMatrix& merge(const ConfusionMatrix& other);

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    ClassTable table_;
    std::vector<std::uint64_t> counts_;
};

// Adds one pixel pair per non-ignore ground-truth pixel.
void accumulate(const LabelMask& gt, const LabelMask& pred, ConfusionMatrix& cm);

struct F1Scores {
    // Present (appears in gt or prediction) classes only.
    std::map<std::size_t, double> per_class;
    // Mean over classes present in ground truth.
    double macro = 0.0;
};

F1Scores f1_scores(const ConfusionMatrix& cm);

struct EvalReport {
    ConfusionMatrix confusion;
    F1Scores f1;
    std::vector<std::uint64_t> pixel_counts_gt;
    std::string model_tag;
    std::string dataset_tag;
    std::size_t images = 0;
};

EvalReport make_report(ConfusionMatrix cm, std::string model_tag, std::string dataset_tag,
                       std::size_t images);
std::string serialize_report(const EvalReport& report);
EvalReport parse_report(std::string_view json_text);

struct DeltaRow {
    std::string name;
    double f1_a = 0.0;
    double f1_b = 0.0;
    double delta = 0.0;
    std::uint64_t train_pixels = 0;
};

// Classes with an F1 in either report, ascending by training pixels (ties by
// class index). A class missing from one report counts as F1 0 there.
std::vector<DeltaRow> delta_report(const EvalReport& a, const EvalReport& b,
                                   const ClassPixelCounts& train_pixels);
std::string delta_csv(const std::vector<DeltaRow>& rows);

// Nested per-collection subsets: one seeded permutation of each collection's
// kept records (sorted by id), subset k takes the first counts[k] of each.
std::vector<DatasetManifest> efficiency_subsets(const DatasetManifest& manifest,
                                                const std::vector<std::size_t>& per_collection,
                                                std::uint64_t seed,
                                                std::optional<Split> split = std::nullopt);

}  // namespace agricurate
