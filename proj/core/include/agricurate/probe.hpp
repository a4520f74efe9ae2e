#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agricurate {

// Dense labeled sample set, row-major n x dim.
struct ProbeDataset {
    std::size_t dim = 0;
    std::vector<double> x;
    std::vector<std::size_t> y;
    std::vector<std::string> ids;
    std::vector<std::string> class_names;

    std::size_t size() const noexcept { return y.size(); }
    std::span<const double> row(std::size_t i) const noexcept {
        return {x.data() + i * dim, dim};
    }
    void add(std::span<const double> features, std::size_t label, std::string id);
};

struct ProbeConfig {
    double learning_rate = 0.1;
    double l2 = 1e-4;
    int epochs = 500;
    int max_halvings = 20;
    std::uint64_t seed = 0;
    double holdout_fraction = 0.2;
};

struct ProbeModel {
    std::size_t classes = 0;
    std::size_t dim = 0;
    std::vector<double> weights;  // classes x dim
    std::vector<double> bias;     // classes
    std::vector<double> feature_mean;
    std::vector<double> feature_scale;
    std::vector<std::string> class_names;
    ProbeConfig config;
    std::vector<double> loss_history;  // loss before each epoch, then final

    std::vector<double> logits(std::span<const double> raw) const;
    std::vector<double> probabilities(std::span<const double> raw) const;
    // argmax of logits, lowest index on ties
    std::size_t predict(std::span<const double> raw) const;
};

struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> grad_weights;
    std::vector<double> grad_bias;
};

// Mean cross-entropy of softmax(W x + b) plus l2 * ||W||^2 / 2, evaluated on
// already standardized rows.
LossAndGradient probe_objective(std::span<const double> weights, std::span<const double> bias,
                                const ProbeDataset& standardized, std::size_t classes, double l2);

struct Standardization {
    std::vector<double> mean;
    std::vector<double> scale;  // population std; 1 where the std is 0
};

Standardization fit_standardization(const ProbeDataset& data);
ProbeDataset apply_standardization(const ProbeDataset& data, const Standardization& s);

// Full-batch gradient descent from zero. A step that raises the loss is
// retried at half the rate (at most max_halvings times); the reduced rate is
// kept for later epochs.
ProbeModel train_probe(const ProbeDataset& data, const ProbeConfig& config = {});

double evaluate_probe(const ProbeModel& model, const ProbeDataset& holdout);

struct ProbeSplit {
    ProbeDataset train;
    ProbeDataset holdout;
};

// Per class: ids sorted, seeded shuffle, round(fraction * n) to holdout while
// leaving at least one training sample.
ProbeSplit stratified_split(const ProbeDataset& data, double holdout_fraction,
                            std::uint64_t seed);

struct CheckpointScore {
    int epoch = 0;
    double accuracy = 0.0;
};

// Epoch with the highest accuracy, smallest epoch on ties.
int select_checkpoint(std::span<const CheckpointScore> runs);

// Loads `<features_dir>/<file>` for each JSONL row {"file": ..., "label": ...}
// and mean-pools it. Class names are sorted.
ProbeDataset load_probe_dataset(const std::filesystem::path& features_dir,
                                const std::filesystem::path& labels_jsonl, int workers = 1);

struct ProbeReport {
    std::string tag;
    int epoch = 0;
    double accuracy = 0.0;
    double train_accuracy = 0.0;
    std::size_t train_samples = 0;
    std::size_t holdout_samples = 0;
    std::vector<std::string> class_names;
    ProbeConfig config;
    double final_loss = 0.0;
};

std::string serialize_probe_report(const ProbeReport& report);
ProbeReport parse_probe_report(std::string_view json_text);

}  // namespace agricurate
