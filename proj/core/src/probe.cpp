#include "agricurate/probe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "agricurate/error.hpp"
#include "agricurate/feature_io.hpp"
#include "agricurate/parallel.hpp"
#include "agricurate/rng.hpp"

namespace agricurate {
namespace fs = std::filesystem;

void ProbeDataset::add(std::span<const double> features, std::size_t label, std::string id) {
    if (dim == 0 && y.empty()) dim = features.size();
    if (features.size() != dim) throw DomainError("feature dimension mismatch for `" + id + "`");
    x.insert(x.end(), features.begin(), features.end());
    y.push_back(label);
    ids.push_back(std::move(id));
}

namespace {

// Numerically stable softmax in place.
void softmax(std::vector<double>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - m);
        sum += v;
    }
    for (double& v : z) v /= sum;
}

std::vector<double> standardize_row(std::span<const double> raw, const std::vector<double>& mean,
                                    const std::vector<double>& scale) {
    std::vector<double> out(raw.size());
    for (std::size_t d = 0; d < raw.size(); ++d) out[d] = (raw[d] - mean[d]) / scale[d];
    return out;
}

}  // namespace

std::vector<double> ProbeModel::logits(std::span<const double> raw) const {
    if (raw.size() != dim) throw DomainError("probe input has dimension " + std::to_string(raw.size()) +
                                             ", model expects " + std::to_string(dim));
    const auto z = standardize_row(raw, feature_mean, feature_scale);
    std::vector<double> out(classes);
    for (std::size_t k = 0; k < classes; ++k) {
        double acc = bias[k];
        for (std::size_t d = 0; d < dim; ++d) acc += weights[k * dim + d] * z[d];
        out[k] = acc;
    }
    return out;
}

std::vector<double> ProbeModel::probabilities(std::span<const double> raw) const {
    auto z = logits(raw);
    softmax(z);
    return z;
}

std::size_t ProbeModel::predict(std::span<const double> raw) const {
    const auto z = logits(raw);
    return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

LossAndGradient probe_objective(std::span<const double> weights, std::span<const double> bias,
                                const ProbeDataset& data, std::size_t classes, double l2) {
    const std::size_t n = data.size();
    const std::size_t dim = data.dim;
    LossAndGradient out;
    out.grad_weights.assign(classes * dim, 0.0);
    out.grad_bias.assign(classes, 0.0);
    std::vector<double> z(classes);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.row(i);
        for (std::size_t k = 0; k < classes; ++k) {
            double acc = bias[k];
            for (std::size_t d = 0; d < dim; ++d) acc += weights[k * dim + d] * x[d];
            z[k] = acc;
        }
        const double m = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double v : z) sum += std::exp(v - m);
        const double log_norm = m + std::log(sum);
        loss += log_norm - z[data.y[i]];
        for (std::size_t k = 0; k < classes; ++k) {
            const double residual = std::exp(z[k] - log_norm) - (k == data.y[i] ? 1.0 : 0.0);
            out.grad_bias[k] += residual;
            for (std::size_t d = 0; d < dim; ++d) out.grad_weights[k * dim + d] += residual * x[d];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    double norm2 = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        norm2 += weights[j] * weights[j];
        out.grad_weights[j] = out.grad_weights[j] * inv_n + l2 * weights[j];
    }
    for (double& g : out.grad_bias) g *= inv_n;
    out.loss = loss * inv_n + 0.5 * l2 * norm2;
    return out;
}

Standardization fit_standardization(const ProbeDataset& data) {
    const std::size_t n = data.size();
    if (n == 0) throw DomainError("cannot standardize an empty dataset");
    Standardization s;
    s.mean.assign(data.dim, 0.0);
    s.scale.assign(data.dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.row(i);
        for (std::size_t d = 0; d < data.dim; ++d) s.mean[d] += x[d];
    }
    for (double& m : s.mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.row(i);
        for (std::size_t d = 0; d < data.dim; ++d) {
            const double c = x[d] - s.mean[d];
            s.scale[d] += c * c;
        }
    }
    for (double& v : s.scale) {
        v = std::sqrt(v / static_cast<double>(n));
        if (!(v > 0.0)) v = 1.0;
    }
    return s;
}

ProbeDataset apply_standardization(const ProbeDataset& data, const Standardization& s) {
    ProbeDataset out = data;
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t d = 0; d < data.dim; ++d) {
            double& v = out.x[i * data.dim + d];
            v = (v - s.mean[d]) / s.scale[d];
        }
    }
    return out;
}

ProbeModel train_probe(const ProbeDataset& data, const ProbeConfig& config) {
    const std::size_t classes = data.class_names.size();
    if (classes < 2) throw DomainError("train_probe needs at least two classes");
    if (data.dim == 0) throw DomainError("train_probe needs nonempty features");
    std::vector<std::size_t> per_class(classes, 0);
    for (std::size_t label : data.y) {
        if (label >= classes) throw DomainError("label index out of range");
        ++per_class[label];
    }
    for (std::size_t k = 0; k < classes; ++k) {
        if (per_class[k] == 0) {
            throw DomainError("class `" + data.class_names[k] + "` has no training samples");
        }
    }
    if (!(config.learning_rate > 0.0) || config.epochs < 0 || config.l2 < 0.0) {
        throw ConfigError("probe needs learning_rate > 0, epochs >= 0, l2 >= 0");
    }

    const Standardization s = fit_standardization(data);
    const ProbeDataset z = apply_standardization(data, s);

    ProbeModel model;
    model.classes = classes;
    model.dim = data.dim;
    model.weights.assign(classes * data.dim, 0.0);
    model.bias.assign(classes, 0.0);
    model.feature_mean = s.mean;
    model.feature_scale = s.scale;
    model.class_names = data.class_names;
    model.config = config;

    double rate = config.learning_rate;
    LossAndGradient current = probe_objective(model.weights, model.bias, z, classes, config.l2);
    std::vector<double> next_w(model.weights.size());
    std::vector<double> next_b(model.bias.size());
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (!std::isfinite(current.loss)) {
            throw TrainingError("probe loss is not finite at epoch " + std::to_string(epoch), epoch);
        }
        model.loss_history.push_back(current.loss);
        bool accepted = false;
        for (int halvings = 0;; ++halvings) {
            for (std::size_t j = 0; j < next_w.size(); ++j) next_w[j] = model.weights[j] - rate * current.grad_weights[j];
            for (std::size_t k = 0; k < next_b.size(); ++k) next_b[k] = model.bias[k] - rate * current.grad_bias[k];
            LossAndGradient candidate = probe_objective(next_w, next_b, z, classes, config.l2);
            if (std::isfinite(candidate.loss) && candidate.loss <= current.loss) {
                model.weights.swap(next_w);
                model.bias.swap(next_b);
                current = std::move(candidate);
                accepted = true;
                break;
            }
            if (halvings == config.max_halvings) break;
            rate *= 0.5;
        }
        if (!accepted) break;  // no descent step left at this resolution
    }
    model.loss_history.push_back(current.loss);
    return model;
}

double evaluate_probe(const ProbeModel& model, const ProbeDataset& holdout) {
    if (holdout.size() == 0) throw DomainError("evaluate_probe on an empty holdout set");
    if (holdout.dim != model.dim) {
        throw DomainError("holdout dimension " + std::to_string(holdout.dim) +
                          " differs from model dimension " + std::to_string(model.dim));
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < holdout.size(); ++i) {
        if (model.predict(holdout.row(i)) == holdout.y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(holdout.size());
}

ProbeSplit stratified_split(const ProbeDataset& data, double holdout_fraction, std::uint64_t seed) {
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
        throw ConfigError("holdout fraction must lie in [0,1)");
    }
    std::vector<std::vector<std::size_t>> by_class(data.class_names.size());
    for (std::size_t i = 0; i < data.size(); ++i) by_class[data.y[i]].push_back(i);

    std::vector<char> in_holdout(data.size(), 0);
    for (std::size_t k = 0; k < by_class.size(); ++k) {
        auto& members = by_class[k];
        std::sort(members.begin(), members.end(),
                  [&](std::size_t a, std::size_t b) { return data.ids[a] < data.ids[b]; });
        Rng rng(Rng::derive(seed, k));
        rng.shuffle(std::span<std::size_t>(members));
        const std::size_t n = members.size();
        std::size_t take = static_cast<std::size_t>(std::floor(holdout_fraction * static_cast<double>(n) + 0.5));
        if (n > 0) take = std::min(take, n - 1);
        for (std::size_t j = 0; j < take; ++j) in_holdout[members[j]] = 1;
    }

    ProbeSplit split;
    split.train.class_names = split.holdout.class_names = data.class_names;
    split.train.dim = split.holdout.dim = data.dim;
    for (std::size_t i = 0; i < data.size(); ++i) {
        (in_holdout[i] ? split.holdout : split.train).add(data.row(i), data.y[i], data.ids[i]);
    }
    return split;
}

int select_checkpoint(std::span<const CheckpointScore> runs) {
    if (runs.empty()) throw DomainError("select_checkpoint needs at least one run");
    const CheckpointScore* best = &runs.front();
    for (const auto& r : runs) {
        if (r.accuracy > best->accuracy || (r.accuracy == best->accuracy && r.epoch < best->epoch)) {
            best = &r;
        }
    }
    return best->epoch;
}

ProbeDataset load_probe_dataset(const fs::path& features_dir, const fs::path& labels_jsonl,
                                int workers) {
    std::ifstream in(labels_jsonl);
    if (!in) throw IoError("cannot open labels " + labels_jsonl.string());
    std::vector<std::pair<std::string, std::string>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            rows.emplace_back(j.at("file").get<std::string>(), j.at("label").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("labels line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    std::set<std::string> names;
    for (const auto& [_, label] : rows) names.insert(label);

    std::vector<std::vector<double>> pooled(rows.size());
    parallel_for(rows.size(), workers, [&](std::size_t i) {
        pooled[i] = mean_pool(read_agft(features_dir / rows[i].first));
    });

    ProbeDataset data;
    data.class_names.assign(names.begin(), names.end());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto label = static_cast<std::size_t>(
            std::find(data.class_names.begin(), data.class_names.end(), rows[i].second) -
            data.class_names.begin());
        data.add(pooled[i], label, rows[i].first);
    }
    return data;
}

std::string serialize_probe_report(const ProbeReport& report) {
    nlohmann::ordered_json j;
    j["tag"] = report.tag;
    j["epoch"] = report.epoch;
    j["accuracy"] = report.accuracy;
    j["train_accuracy"] = report.train_accuracy;
    j["train_samples"] = report.train_samples;
    j["holdout_samples"] = report.holdout_samples;
    j["classes"] = report.class_names;
    j["final_loss"] = report.final_loss;
    j["config"] = {{"learning_rate", report.config.learning_rate},
                   {"l2", report.config.l2},
                   {"epochs", report.config.epochs},
                   {"max_halvings", report.config.max_halvings},
                   {"seed", report.config.seed},
                   {"holdout_fraction", report.config.holdout_fraction}};
    return j.dump(2) + "\n";
}

ProbeReport parse_probe_report(std::string_view json_text) {
    try {
        const auto j = nlohmann::json::parse(json_text);
        ProbeReport r;
        r.tag = j.value("tag", "");
        r.epoch = j.at("epoch").get<int>();
        r.accuracy = j.at("accuracy").get<double>();
        r.train_accuracy = j.value("train_accuracy", 0.0);
        r.train_samples = j.value("train_samples", std::size_t{0});
        r.holdout_samples = j.value("holdout_samples", std::size_t{0});
        r.class_names = j.value("classes", std::vector<std::string>{});
        r.final_loss = j.value("final_loss", 0.0);
        if (j.contains("config")) {
            const auto& c = j.at("config");
            r.config.learning_rate = c.value("learning_rate", r.config.learning_rate);
            r.config.l2 = c.value("l2", r.config.l2);
            r.config.epochs = c.value("epochs", r.config.epochs);
            r.config.max_halvings = c.value("max_halvings", r.config.max_halvings);
            r.config.seed = c.value("seed", r.config.seed);
            r.config.holdout_fraction = c.value("holdout_fraction", r.config.holdout_fraction);
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("probe report: ") + e.what());
    }
}

}  // namespace agricurate
