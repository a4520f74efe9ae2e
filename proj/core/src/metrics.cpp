#include "agricurate/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include <nlohmann/json.hpp>

#include "agricurate/error.hpp"
#include "agricurate/hashing.hpp"
#include "agricurate/rng.hpp"

namespace agricurate {
using ojson = nlohmann::ordered_json;

ConfusionMatrix::ConfusionMatrix(ClassTable table)
    : table_(std::move(table)), counts_(table_.size() * table_.size(), 0) {}

std::uint64_t ConfusionMatrix::total() const noexcept {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t c) const noexcept {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < classes(); ++j) s += (*this)(c, j);
    return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t c) const noexcept {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < classes(); ++i) s += (*this)(i, c);
    return s;
}

ConfusionMatrix& ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (!(table_ == other.table_)) throw DomainError("cannot merge matrices with different class tables");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
}

void accumulate(const LabelMask& gt, const LabelMask& pred, ConfusionMatrix& cm) {
    if (gt.width() != pred.width() || gt.height() != pred.height()) {
        throw DomainError("ground truth and prediction dimensions differ");
    }
    if (!(gt.table == pred.table) || !(gt.table == cm.table())) {
        throw DomainError("class tables differ");
    }
    const std::size_t k = cm.classes();
    const auto g = gt.raster.data();
    const auto p = pred.raster.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] == gt.table.ignore_value) continue;
        if (g[i] >= k) throw DomainError("ground-truth value " + std::to_string(g[i]) + " not in class table");
        if (p[i] >= k) throw DomainError("predicted value " + std::to_string(p[i]) + " not in class table");
        ++cm(g[i], p[i]);
    }
}

F1Scores f1_scores(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw DomainError("f1_scores of an empty confusion matrix");
    F1Scores out;
    double sum = 0.0;
    std::size_t in_gt = 0;
    for (std::size_t c = 0; c < cm.classes(); ++c) {
        const std::uint64_t row = cm.row_sum(c);
        const std::uint64_t col = cm.col_sum(c);
        if (row == 0 && col == 0) continue;
        const std::uint64_t tp = cm(c, c);
        const std::uint64_t fn = row - tp;
        const std::uint64_t fp = col - tp;
        const std::uint64_t denom = 2 * tp + fp + fn;
        const double f1 = denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
        out.per_class[c] = f1;
        if (row > 0) {
            sum += f1;
            ++in_gt;
        }
    }
    out.macro = in_gt == 0 ? 0.0 : sum / static_cast<double>(in_gt);
    return out;
}

EvalReport make_report(ConfusionMatrix cm, std::string model_tag, std::string dataset_tag,
                       std::size_t images) {
    EvalReport r;
    r.f1 = f1_scores(cm);
    for (std::size_t c = 0; c < cm.classes(); ++c) r.pixel_counts_gt.push_back(cm.row_sum(c));
    r.confusion = std::move(cm);
    r.model_tag = std::move(model_tag);
    r.dataset_tag = std::move(dataset_tag);
    r.images = images;
    return r;
}

std::string serialize_report(const EvalReport& report) {
    const ClassTable& table = report.confusion.table();
    ojson j;
    j["model_tag"] = report.model_tag;
    j["dataset_tag"] = report.dataset_tag;
    j["images"] = report.images;
    j["averaging"] = "macro_over_gt_present";
    j["class_table"] = table.names;
    j["ignore_value"] = table.ignore_value;
    ojson matrix = ojson::array();
    for (std::size_t i = 0; i < report.confusion.classes(); ++i) {
        ojson row = ojson::array();
        for (std::size_t k = 0; k < report.confusion.classes(); ++k) row.push_back(report.confusion(i, k));
        matrix.push_back(std::move(row));
    }
    j["confusion"] = std::move(matrix);
    j["per_class_f1"] = ojson::object();
    for (const auto& [c, f1] : report.f1.per_class) j["per_class_f1"][table.names[c]] = f1;
    j["macro_f1"] = report.f1.macro;
    j["pixel_counts_gt"] = ojson::object();
    for (std::size_t c = 0; c < report.pixel_counts_gt.size(); ++c) {
        j["pixel_counts_gt"][table.names[c]] = report.pixel_counts_gt[c];
    }
    return j.dump(2) + "\n";
}

EvalReport parse_report(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("eval report: ") + e.what());
    }
    try {
        ClassTable table;
        table.names = j.at("class_table").get<std::vector<std::string>>();
        table.ignore_value = j.value("ignore_value", kIgnoreValue);
        ConfusionMatrix cm(table);
        const auto& rows = j.at("confusion");
        if (rows.size() != table.size()) throw ParseError("eval report: confusion size mismatch");
        for (std::size_t i = 0; i < table.size(); ++i) {
            if (rows[i].size() != table.size()) throw ParseError("eval report: confusion row size mismatch");
            for (std::size_t k = 0; k < table.size(); ++k) cm(i, k) = rows[i][k].get<std::uint64_t>();
        }
        return make_report(std::move(cm), j.value("model_tag", ""), j.value("dataset_tag", ""),
                           j.value("images", std::size_t{0}));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("eval report: ") + e.what());
    }
}

std::vector<DeltaRow> delta_report(const EvalReport& a, const EvalReport& b,
                                   const ClassPixelCounts& train_pixels) {
    const ClassTable& table = a.confusion.table();
    if (table.names != b.confusion.table().names) {
        throw DomainError("delta_report: class tables differ");
    }
    struct Keyed {
        DeltaRow row;
        std::size_t index;
    };
    std::vector<Keyed> rows;
    for (std::size_t c = 0; c < table.size(); ++c) {
        const auto fa = a.f1.per_class.find(c);
        const auto fb = b.f1.per_class.find(c);
        if (fa == a.f1.per_class.end() && fb == b.f1.per_class.end()) continue;
        DeltaRow row;
        row.name = table.names[c];
        row.f1_a = fa == a.f1.per_class.end() ? 0.0 : fa->second;
        row.f1_b = fb == b.f1.per_class.end() ? 0.0 : fb->second;
        row.delta = row.f1_b - row.f1_a;
        if (auto it = train_pixels.counts.find(row.name); it != train_pixels.counts.end()) {
            row.train_pixels = it->second;
        }
        rows.push_back({row, c});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Keyed& x, const Keyed& y) {
        return x.row.train_pixels != y.row.train_pixels ? x.row.train_pixels < y.row.train_pixels
                                                        : x.index < y.index;
    });
    std::vector<DeltaRow> out;
    out.reserve(rows.size());
    for (auto& k : rows) out.push_back(std::move(k.row));
    return out;
}

std::string delta_csv(const std::vector<DeltaRow>& rows) {
    std::string out = "class,f1_a,f1_b,delta,train_pixels\n";
    char buffer[160];
    for (const auto& r : rows) {
        std::snprintf(buffer, sizeof buffer, ",%.6f,%.6f,%+.6f,%llu\n", r.f1_a, r.f1_b, r.delta,
                      static_cast<unsigned long long>(r.train_pixels));
        out += r.name;
        out += buffer;
    }
    return out;
}

std::vector<DatasetManifest> efficiency_subsets(const DatasetManifest& manifest,
                                                const std::vector<std::size_t>& per_collection,
                                                std::uint64_t seed, std::optional<Split> split) {
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        const auto& r = manifest.records[i];
        if (!r.kept() || (split && r.split != *split)) continue;
        members[r.collection].push_back(i);
    }
    if (members.empty()) throw DomainError("efficiency_subsets: no eligible records");
    for (const auto& [collection, ids] : members) {
        for (std::size_t count : per_collection) {
            if (count > ids.size()) {
                throw DomainError("subset size " + std::to_string(count) + " exceeds collection `" +
                                  collection + "` (" + std::to_string(ids.size()) + " records)");
            }
        }
    }
    for (auto& [collection, ids] : members) {
        std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
            return manifest.records[a].id < manifest.records[b].id;
        });
        Rng rng(Rng::derive(seed, fnv1a64(collection)));
        rng.shuffle(std::span<std::size_t>(ids));
    }

    std::vector<DatasetManifest> subsets;
    for (std::size_t count : per_collection) {
        std::vector<std::size_t> chosen;
        for (const auto& [_, ids] : members) chosen.insert(chosen.end(), ids.begin(), ids.begin() + count);
        std::sort(chosen.begin(), chosen.end());  // manifest order
        DatasetManifest subset;
        for (std::size_t i : chosen) subset.records.push_back(manifest.records[i]);
        subsets.push_back(std::move(subset));
    }
    return subsets;
}

}  // namespace agricurate
