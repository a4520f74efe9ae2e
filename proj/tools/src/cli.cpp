#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "agricurate/class_table.hpp"
#include "agricurate/error.hpp"
#include "agricurate/feature_io.hpp"
#include "agricurate/hashing.hpp"
#include "agricurate/image_io.hpp"
#include "agricurate/manifest.hpp"
#include "agricurate/metrics.hpp"
#include "agricurate/parallel.hpp"
#include "agricurate/pcaviz.hpp"
#include "agricurate/primitives.hpp"
#include "agricurate/probe.hpp"
#include "agricurate/quality.hpp"
#include "agricurate/tiler.hpp"
#include "agricurate/vegetation.hpp"
#include "agricurate/version.hpp"
#include "agricurate/weights.hpp"

namespace agricurate::cli {
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct Globals {
    std::string workdir = ".";
    std::uint64_t seed = 0;
    int workers = 0;
};

// Shared state for one invocation.
class Context {
public:
    Context(const Globals& globals, std::ostream& err) : globals_(globals), err_(err) {}

    fs::path path(const std::string& p) const {
        const fs::path candidate(p);
        return candidate.is_absolute() ? candidate : fs::path(globals_.workdir) / candidate;
    }
    int workers() const { return resolve_workers(globals_.workers); }
    std::uint64_t seed(const CLI::Option* local, std::uint64_t value) const {
        return local->count() > 0 ? value : globals_.seed;
    }

    void log(ojson record) const { err_ << record.dump() << '\n'; }

    // reports/<stage>.json under the workdir
    void write_stage_report(const std::string& stage, const ojson& summary) const {
        const fs::path file = path("reports") / (stage + ".json");
        write_text(file, summary.dump(2) + "\n");
    }

    static void write_text(const fs::path& file, const std::string& text) {
        io::write_file_bytes(file, std::span<const std::uint8_t>(
                                       reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    }

private:
    const Globals& globals_;
    std::ostream& err_;
};

std::string read_text(const fs::path& file) {
    const auto bytes = io::read_file_bytes(file);
    return {bytes.begin(), bytes.end()};
}

template <typename T>
std::vector<T> parse_csv(const std::string& text, const char* what) {
    std::vector<T> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::istringstream field(item);
        T value{};
        if (!(field >> value) || !(field >> std::ws).eof()) {
            throw ConfigError(std::string("bad value `") + item + "` in " + what);
        }
        out.push_back(value);
    }
    if (out.empty()) throw ConfigError(std::string("empty list for ") + what);
    return out;
}

ojson manifest_summary(const DatasetManifest& m) {
    const CurateStats s = curate_stats(m);
    return {{"records", s.total},         {"kept", s.kept},
            {"duplicate", s.duplicate},   {"near_duplicate", s.near_duplicate},
            {"blurry", s.blurry},         {"dark", s.dark},
            {"decode_failed", s.decode_failed}};
}

// A registered subcommand: CLI11 options are bound to `opts`, `action` runs it
// and returns the summary logged at the end of the run.
struct Command {
    CLI::App* app = nullptr;
    std::function<ojson(const Context&)> action;
    std::function<std::uint64_t(const Context&)> seed;
};

// --- curate ------------------------------------------------------------------

struct CurateOptions {
    std::string manifest;
    std::string images;
    std::string out;
    QualityConfig quality;
};

Command add_curate(CLI::App& app, CurateOptions& o) {
    auto* sub = app.add_subcommand("curate", "Flag blurry, dark, duplicate and near-duplicate images");
    sub->add_option("--manifest", o.manifest, "Input manifest (omit to scan --images)");
    sub->add_option("--images", o.images, "Image root directory")->required();
    sub->add_option("--blur-threshold", o.quality.blur_threshold, "Laplacian variance below which an image is blurry")
        ->capture_default_str();
    sub->add_option("--dark-threshold", o.quality.dark_threshold, "Mean luma below which an image is dark")
        ->capture_default_str();
    sub->add_option("--phash-distance", o.quality.phash_distance, "Hamming radius for near-duplicates")
        ->capture_default_str();
    sub->add_option("--out", o.out, "Output manifest")->required();
    return {sub, [&o](const Context& ctx) {
                const fs::path root = ctx.path(o.images);
                DatasetManifest input = o.manifest.empty() ? scan_images(root, ctx.workers())
                                                           : load_manifest(ctx.path(o.manifest));
                DatasetManifest result = curate(input, root, o.quality, ctx.workers());
                save_manifest(result, ctx.path(o.out));
                ojson summary = manifest_summary(result);
                summary["config"] = {{"blur_threshold", o.quality.blur_threshold},
                                     {"dark_threshold", o.quality.dark_threshold},
                                     {"phash_distance", o.quality.phash_distance}};
                ctx.write_stage_report("curate", summary);
                return summary;
            }, nullptr};
}

// --- split -------------------------------------------------------------------

struct SplitOptions {
    std::string manifest;
    std::vector<std::string> rules;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
    std::string out;
};

Command add_split(CLI::App& app, SplitOptions& o) {
    auto* sub = app.add_subcommand("split", "Assign train/val/test splits per collection");
    sub->add_option("--manifest", o.manifest, "Input manifest")->required();
    sub->add_option("--rule", o.rules, "COLLECTION:train,val,test (repeatable)")->required();
    o.seed_opt = sub->add_option("--seed", o.seed, "Permutation seed (default: global seed)");
    sub->add_option("--out", o.out, "Output manifest")->required();
    Command cmd{sub, nullptr, nullptr};
    cmd.seed = [&o](const Context& ctx) { return ctx.seed(o.seed_opt, o.seed); };
    cmd.action = [&o, seed = cmd.seed](const Context& ctx) {
        SplitSpec spec;
        spec.seed = seed(ctx);
        for (const auto& r : o.rules) spec.rules.push_back(parse_split_rule(r));
        DatasetManifest result = assign_splits(load_manifest(ctx.path(o.manifest)), spec);
        save_manifest(result, ctx.path(o.out));
        std::map<std::string, std::map<std::string, std::size_t>> per;
        for (const auto& r : result.records) {
            if (r.split != Split::unassigned) ++per[r.collection][std::string(to_string(r.split))];
        }
        ojson summary = {{"train", result.count(Split::train)},
                         {"val", result.count(Split::val)},
                         {"test", result.count(Split::test)},
                         {"unassigned", result.count(Split::unassigned)},
                         {"per_collection", per},
                         {"seed", spec.seed}};
        ctx.write_stage_report("split", summary);
        return summary;
    };
    return cmd;
}

// --- tile --------------------------------------------------------------------

struct TileOptions {
    std::string manifest;
    std::string images = ".";
    int size = 518;
    std::string out_dir = "tiles";
    std::string out_manifest;
};

Command add_tile(CLI::App& app, TileOptions& o) {
    auto* sub = app.add_subcommand("tile", "Cut kept images into non-overlapping square tiles");
    sub->add_option("--manifest", o.manifest, "Curated manifest")->required();
    sub->add_option("--images", o.images, "Root for relative image paths")->capture_default_str();
    sub->add_option("--size", o.size, "Tile edge in pixels")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", o.out_dir, "Tile output directory")->capture_default_str();
    sub->add_option("--out-manifest", o.out_manifest, "Tile manifest")->required();
    return {sub, [&o](const Context& ctx) {
                const auto result = tile_manifest(load_manifest(ctx.path(o.manifest)), ctx.path(o.images),
                                                  ctx.path(o.out_dir), o.size, ctx.workers());
                save_manifest(result.tiles, ctx.path(o.out_manifest));
                ojson summary = {{"parents", result.parents},
                                 {"tiles", result.tiles.size()},
                                 {"skipped", result.skipped},
                                 {"size", o.size}};
                ctx.write_stage_report("tile", summary);
                return summary;
            }, nullptr};
}

// --- vegcover ----------------------------------------------------------------

struct VegcoverOptions {
    std::string tiles;
    std::string mode = "exg";
    std::string mask_dir;
    std::string tile_dir = "tiles";
    std::string out;
};

Command add_vegcover(CLI::App& app, VegcoverOptions& o) {
    auto* sub = app.add_subcommand("vegcover", "Compute per-tile vegetation coverage");
    sub->add_option("--tiles", o.tiles, "Tile manifest")->required();
    sub->add_option("--mode", o.mode, "exg (ExG + Otsu) or mask (external masks)")
        ->capture_default_str()
        ->check(CLI::IsMember({"exg", "mask"}));
    sub->add_option("--mask-dir", o.mask_dir, "External masks, <tile id>.png");
    sub->add_option("--tile-dir", o.tile_dir, "Root for relative tile paths")->capture_default_str();
    sub->add_option("--out", o.out, "Output manifest")->required();
    return {sub, [&o](const Context& ctx) {
                const auto source = o.mode == "mask" ? CoverageSource::external_mask : CoverageSource::exg_otsu;
                if (source == CoverageSource::external_mask && o.mask_dir.empty()) {
                    throw ConfigError("--mode mask needs --mask-dir");
                }
                DatasetManifest result = compute_coverage(load_manifest(ctx.path(o.tiles)), ctx.path(o.tile_dir),
                                                          source, ctx.path(o.mask_dir), ctx.workers());
                save_manifest(result, ctx.path(o.out));
                double sum = 0.0;
                std::size_t n = 0;
                for (const auto& r : result.records) {
                    if (r.veg_coverage) {
                        sum += *r.veg_coverage;
                        ++n;
                    }
                }
                ojson summary = {{"tiles", n}, {"mode", o.mode}, {"mean_coverage", n ? sum / n : 0.0}};
                ctx.write_stage_report("vegcover", summary);
                return summary;
            }, nullptr};
}

// --- balance -----------------------------------------------------------------

struct BalanceOptions {
    std::string tiles;
    std::size_t target = 1;
    std::string edges;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
    std::string out;
};

Command add_balance(CLI::App& app, BalanceOptions& o) {
    auto* sub = app.add_subcommand("balance", "Select an equal number of tiles per coverage interval");
    sub->add_option("--tiles", o.tiles, "Tile manifest with veg_coverage")->required();
    sub->add_option("--target", o.target, "Total number of tiles to select")->required();
    sub->add_option("--edges", o.edges, "Interval edges, e.g. 0,0.1,...,1 (a [0,0] bin is implicit)");
    o.seed_opt = sub->add_option("--seed", o.seed, "Sampling seed (default: global seed)");
    sub->add_option("--out", o.out, "Output manifest")->required();
    Command cmd{sub, nullptr, nullptr};
    cmd.seed = [&o](const Context& ctx) { return ctx.seed(o.seed_opt, o.seed); };
    cmd.action = [&o, seed = cmd.seed](const Context& ctx) {
        VegetationConfig config;
        if (!o.edges.empty()) config.bin_edges = parse_csv<double>(o.edges, "--edges");
        config.target_total = o.target;
        config.seed = seed(ctx);
        const BalanceResult result = balance(load_manifest(ctx.path(o.tiles)), config);
        save_manifest(result.manifest, ctx.path(o.out));
        ojson bins = ojson::array();
        for (const auto& b : result.bins) {
            bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"available", b.available}, {"selected", b.selected}});
        }
        ojson summary = {{"quota", result.quota},
                         {"selected", result.total_selected},
                         {"seed", config.seed},
                         {"bins", bins}};
        ctx.write_stage_report("balance", summary);
        return summary;
    };
    return cmd;
}

// --- primitives --------------------------------------------------------------

struct PrimitivesOptions {
    std::string images;
    std::string masks;
    std::string classes;
    std::size_t min_area = 64;
    int padding = 8;
    int connectivity = 8;
    std::string out_dir = "primitives";
    std::string index = "primitives.jsonl";
};

Command add_primitives(CLI::App& app, PrimitivesOptions& o) {
    auto* sub = app.add_subcommand("primitives", "Crop single-blob plant images from species masks");
    sub->add_option("--images", o.images, "Image directory")->required();
    sub->add_option("--masks", o.masks, "Species mask directory (<stem>.png)")->required();
    sub->add_option("--classes", o.classes, "Class table JSON (labels default to indices)");
    sub->add_option("--min-area", o.min_area, "Smallest blob kept, in pixels")->capture_default_str();
    sub->add_option("--padding", o.padding, "Crop padding in pixels")->capture_default_str()->check(CLI::NonNegativeNumber);
    sub->add_option("--connectivity", o.connectivity, "4 or 8")->capture_default_str()->check(CLI::IsMember({4, 8}));
    sub->add_option("--out-dir", o.out_dir, "Crop output directory")->capture_default_str();
    sub->add_option("--index", o.index, "JSONL index, relative to --out-dir unless absolute")->capture_default_str();
    return {sub, [&o](const Context& ctx) {
                ClassTable table;
                if (o.classes.empty()) {
                    table.names.clear();
                    for (int i = 0; i < kIgnoreValue; ++i) table.names.push_back(std::to_string(i));
                } else {
                    table = load_class_table(ctx.path(o.classes));
                }
                PrimitiveOptions options;
                options.min_area = o.min_area;
                options.padding = o.padding;
                options.connectivity = o.connectivity == 4 ? Connectivity::four : Connectivity::eight;
                const fs::path out_dir = ctx.path(o.out_dir);
                const auto result = extract_primitive_dataset(ctx.path(o.images), ctx.path(o.masks), table,
                                                              options, out_dir, ctx.workers());
                const fs::path index = fs::path(o.index).is_absolute() ? fs::path(o.index) : out_dir / o.index;
                Context::write_text(index, serialize_primitive_index(result));
                std::map<std::string, std::size_t> per_label;
                for (const auto& p : result.primitives) ++per_label[p.label];
                ojson summary = {{"images", result.images},
                                 {"missing_masks", result.missing_masks},
                                 {"primitives", result.primitives.size()},
                                 {"per_label", per_label}};
                ctx.write_stage_report("primitives", summary);
                return summary;
            }, nullptr};
}

// --- weights -----------------------------------------------------------------

struct WeightsOptions {
    std::string masks;
    std::string classes;
    std::string manifest;
    double beta = 0.99;
    std::string normalization = "mean_one";
    std::string out;
};

Command add_weights(CLI::App& app, WeightsOptions& o) {
    auto* sub = app.add_subcommand("weights", "Class-balanced loss weights from annotated pixel counts");
    sub->add_option("--masks", o.masks, "Label mask directory")->required();
    sub->add_option("--classes", o.classes, "Class table JSON")->required();
    sub->add_option("--manifest", o.manifest, "Count only masks of train-split records");
    sub->add_option("--beta", o.beta, "Effective-number beta in [0,1)")->capture_default_str();
    sub->add_option("--normalization", o.normalization, "mean_one, sum_one or none")
        ->capture_default_str()
        ->check(CLI::IsMember({"mean_one", "sum_one", "none"}));
    sub->add_option("--out", o.out, "Output weights JSON")->required();
    return {sub, [&o](const Context& ctx) {
                const ClassTable table = load_class_table(ctx.path(o.classes));
                const fs::path mask_dir = ctx.path(o.masks);
                std::vector<fs::path> files;
                if (o.manifest.empty()) {
                    for (const auto& f : io::list_images(mask_dir)) {
                        if (f.extension() == ".png") files.push_back(f);
                    }
                } else {
                    for (const auto& r : load_manifest(ctx.path(o.manifest)).records) {
                        if (!r.kept() || r.split != Split::train) continue;
                        const fs::path id(r.id);
                        files.push_back(mask_dir / id.parent_path() / (id.stem().string() + ".png"));
                    }
                }
                ClassPixelCounts counts;
                for (const auto& name : table.names) counts.counts[name] = 0;
                for (const auto& f : files) {
                    auto mask = io::read_gray(f);
                    if (!mask) throw IoError("cannot read label mask " + f.string());
                    tally_pixels(*mask, table, counts);
                }
                const ClassWeights w = class_weights(counts, o.beta, parse_normalization(o.normalization));
                Context::write_text(ctx.path(o.out), serialize_weights(w));
                ojson summary = {{"masks", files.size()}, {"beta", o.beta}, {"classes", w.weights.size()}};
                ctx.write_stage_report("weights", summary);
                return summary;
            }, nullptr};
}

// --- subsets -----------------------------------------------------------------

struct SubsetsOptions {
    std::string manifest;
    std::string counts = "25,50,75,100,147";
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
    std::string split;
    std::string out_dir;
};

Command add_subsets(CLI::App& app, SubsetsOptions& o) {
    auto* sub = app.add_subcommand("subsets", "Nested per-collection training subsets");
    sub->add_option("--manifest", o.manifest, "Input manifest")->required();
    sub->add_option("--counts", o.counts, "Images per collection, comma separated")->capture_default_str();
    o.seed_opt = sub->add_option("--seed", o.seed, "Permutation seed (default: global seed)");
    sub->add_option("--split", o.split, "Restrict to one split (train, val, test)");
    sub->add_option("--out-dir", o.out_dir, "Directory for subset_<count>.jsonl")->required();
    Command cmd{sub, nullptr, nullptr};
    cmd.seed = [&o](const Context& ctx) { return ctx.seed(o.seed_opt, o.seed); };
    cmd.action = [&o, seed = cmd.seed](const Context& ctx) {
        const auto counts = parse_csv<std::size_t>(o.counts, "--counts");
        std::optional<Split> split;
        if (!o.split.empty()) {
            split = parse_split(o.split);
            if (!split) throw ConfigError("unknown split `" + o.split + "`");
        }
        const std::uint64_t s = seed(ctx);
        const auto subsets = efficiency_subsets(load_manifest(ctx.path(o.manifest)), counts, s, split);
        ojson totals = ojson::array();
        for (std::size_t k = 0; k < subsets.size(); ++k) {
            char name[64];
            std::snprintf(name, sizeof name, "subset_%03zu.jsonl", counts[k]);
            save_manifest(subsets[k], ctx.path(o.out_dir) / name);
            totals.push_back({{"per_collection", counts[k]}, {"total", subsets[k].size()}, {"file", name}});
        }
        ojson summary = {{"seed", s}, {"subsets", totals}};
        ctx.write_stage_report("subsets", summary);
        return summary;
    };
    return cmd;
}

// --- eval --------------------------------------------------------------------

struct EvalOptions {
    std::string gt;
    std::string pred;
    std::string classes;
    std::string model_tag;
    std::string dataset_tag;
    std::string out;
};

Command add_eval(CLI::App& app, EvalOptions& o) {
    auto* sub = app.add_subcommand("eval", "Pixel confusion matrix and per-class / macro F1");
    sub->add_option("--gt", o.gt, "Ground-truth mask directory")->required();
    sub->add_option("--pred", o.pred, "Prediction mask directory (same relative names)")->required();
    sub->add_option("--classes", o.classes, "Class table JSON")->required();
    sub->add_option("--model-tag", o.model_tag, "Model tag recorded in the report");
    sub->add_option("--dataset-tag", o.dataset_tag, "Dataset tag recorded in the report");
    sub->add_option("--out", o.out, "Output report JSON")->required();
    return {sub, [&o](const Context& ctx) {
                const ClassTable table = load_class_table(ctx.path(o.classes));
                const fs::path gt_dir = ctx.path(o.gt);
                const fs::path pred_dir = ctx.path(o.pred);
                std::vector<fs::path> files;
                for (const auto& f : io::list_images(gt_dir)) {
                    if (f.extension() == ".png") files.push_back(f);
                }
                std::vector<ConfusionMatrix> shards(files.size(), ConfusionMatrix(table));
                parallel_for(files.size(), ctx.workers(), [&](std::size_t i) {
                    const fs::path rel = files[i].lexically_relative(gt_dir);
                    auto gt = io::read_gray(files[i]);
                    auto pred = io::read_gray(pred_dir / rel);
                    if (!gt) throw IoError("cannot read ground truth " + files[i].string());
                    if (!pred) throw IoError("missing prediction " + (pred_dir / rel).string());
                    accumulate(LabelMask{std::move(*gt), table}, LabelMask{std::move(*pred), table}, shards[i]);
                });
                ConfusionMatrix cm(table);
                for (const auto& s : shards) cm.merge(s);
                const EvalReport report = make_report(std::move(cm), o.model_tag, o.dataset_tag, files.size());
                Context::write_text(ctx.path(o.out), serialize_report(report));
                ojson summary = {{"images", files.size()}, {"macro_f1", report.f1.macro}};
                ctx.write_stage_report("eval", summary);
                return summary;
            }, nullptr};
}

// --- delta -------------------------------------------------------------------

struct DeltaOptions {
    std::string a;
    std::string b;
    std::string pixels;
    std::string out;
};

Command add_delta(CLI::App& app, DeltaOptions& o) {
    auto* sub = app.add_subcommand("delta", "Class-wise F1 change between two reports vs training pixels");
    sub->add_option("--a", o.a, "Baseline report")->required();
    sub->add_option("--b", o.b, "Compared report")->required();
    sub->add_option("--pixels", o.pixels, "Training pixel counts (weights.json or a name->count map)")->required();
    sub->add_option("--out", o.out, "Output CSV")->required();
    return {sub, [&o](const Context& ctx) {
                const auto rows = delta_report(parse_report(read_text(ctx.path(o.a))),
                                               parse_report(read_text(ctx.path(o.b))),
                                               load_pixel_counts(read_text(ctx.path(o.pixels))));
                Context::write_text(ctx.path(o.out), delta_csv(rows));
                ojson summary = {{"classes", rows.size()}};
                ctx.write_stage_report("delta", summary);
                return summary;
            }, nullptr};
}

// --- probe -------------------------------------------------------------------

struct ProbeOptions {
    std::string features;
    std::string labels;
    std::string out;
    std::string tag;
    int epoch = -1;
    ProbeConfig config;
    CLI::Option* seed_opt = nullptr;
};

int epoch_from_name(const std::string& name) {
    auto end = name.find_last_of("0123456789");
    if (end == std::string::npos) return 0;
    auto begin = name.find_last_not_of("0123456789", end);
    begin = begin == std::string::npos ? 0 : begin + 1;
    return std::stoi(name.substr(begin, end - begin + 1));
}

Command add_probe(CLI::App& app, ProbeOptions& o) {
    auto* sub = app.add_subcommand("probe", "Linear probe accuracy of frozen features");
    sub->add_option("--features", o.features, "Directory of .agft files for one checkpoint")->required();
    sub->add_option("--labels", o.labels, "JSONL rows {\"file\", \"label\"}")->required();
    sub->add_option("--out", o.out, "Output probe report")->required();
    sub->add_option("--tag", o.tag, "Checkpoint tag (default: features directory name)");
    sub->add_option("--epoch", o.epoch, "Checkpoint epoch (default: trailing digits of the directory name)");
    sub->add_option("--learning-rate", o.config.learning_rate)->capture_default_str();
    sub->add_option("--l2", o.config.l2)->capture_default_str();
    sub->add_option("--epochs", o.config.epochs)->capture_default_str();
    sub->add_option("--holdout", o.config.holdout_fraction, "Stratified holdout fraction")->capture_default_str();
    o.seed_opt = sub->add_option("--seed", o.config.seed, "Split seed (default: global seed)");
    Command cmd{sub, nullptr, nullptr};
    cmd.seed = [&o](const Context& ctx) { return ctx.seed(o.seed_opt, o.config.seed); };
    cmd.action = [&o, seed = cmd.seed](const Context& ctx) {
        ProbeConfig config = o.config;
        config.seed = seed(ctx);
        const fs::path dir = ctx.path(o.features);
        const std::string name = dir.lexically_normal().filename().empty()
                                     ? dir.lexically_normal().parent_path().filename().string()
                                     : dir.lexically_normal().filename().string();
        const ProbeDataset data = load_probe_dataset(dir, ctx.path(o.labels), ctx.workers());
        const ProbeSplit split = stratified_split(data, config.holdout_fraction, config.seed);
        const ProbeModel model = train_probe(split.train, config);

        ProbeReport report;
        report.tag = o.tag.empty() ? name : o.tag;
        report.epoch = o.epoch >= 0 ? o.epoch : epoch_from_name(name);
        report.accuracy = split.holdout.size() > 0 ? evaluate_probe(model, split.holdout)
                                                   : evaluate_probe(model, split.train);
        report.train_accuracy = evaluate_probe(model, split.train);
        report.train_samples = split.train.size();
        report.holdout_samples = split.holdout.size();
        report.class_names = data.class_names;
        report.config = config;
        report.final_loss = model.loss_history.back();
        Context::write_text(ctx.path(o.out), serialize_probe_report(report));
        ojson summary = {{"tag", report.tag}, {"epoch", report.epoch}, {"accuracy", report.accuracy}};
        ctx.write_stage_report("probe", summary);
        return summary;
    };
    return cmd;
}

// --- select ------------------------------------------------------------------

struct SelectOptions {
    std::string reports;
    std::string out;
};

Command add_select(CLI::App& app, SelectOptions& o) {
    auto* sub = app.add_subcommand("select", "Pick the checkpoint with the best probe accuracy");
    sub->add_option("--reports", o.reports, "Directory of probe reports (*.json)")->required();
    sub->add_option("--out", o.out, "Output JSON")->required();
    return {sub, [&o](const Context& ctx) {
                const fs::path dir = ctx.path(o.reports);
                std::vector<fs::path> files;
                for (const auto& e : fs::directory_iterator(dir)) {
                    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
                }
                std::sort(files.begin(), files.end());
                std::vector<CheckpointScore> runs;
                std::map<int, std::pair<std::string, std::string>> by_epoch;  // epoch -> (file, tag)
                for (const auto& f : files) {
                    const ProbeReport r = parse_probe_report(read_text(f));
                    runs.push_back({r.epoch, r.accuracy});
                    by_epoch.try_emplace(r.epoch, f.filename().string(), r.tag);
                }
                const int best = select_checkpoint(runs);
                const auto it = std::find_if(runs.begin(), runs.end(), [&](const auto& r) { return r.epoch == best; });
                ojson result = {{"epoch", best},
                                {"accuracy", it->accuracy},
                                {"tag", by_epoch.at(best).second},
                                {"report", by_epoch.at(best).first},
                                {"candidates", runs.size()}};
                Context::write_text(ctx.path(o.out), result.dump(2) + "\n");
                ctx.write_stage_report("select", result);
                return result;
            }, nullptr};
}

// --- pcaviz ------------------------------------------------------------------

struct PcavizOptions {
    std::string features;
    std::string mask;
    std::string out;
    std::string joint;
    int scale = 14;
};

Mask grid_mask(const std::optional<Mask>& vegetation, const FeatureTensor& f) {
    if (!vegetation) return make_mask(static_cast<int>(f.grid_w), static_cast<int>(f.grid_h), 1);
    return foreground_grid(*vegetation, f.grid_h, f.grid_w);
}

Command add_pcaviz(CLI::App& app, PcavizOptions& o) {
    auto* sub = app.add_subcommand("pcaviz", "Render the top-3 principal components of patch features as RGB");
    sub->add_option("--features", o.features, "Feature file (.agft)")->required();
    sub->add_option("--mask", o.mask, "Vegetation mask PNG (nonzero = vegetation); all foreground if omitted");
    sub->add_option("--out", o.out, "Output PNG")->required();
    sub->add_option("--scale", o.scale, "Pixels per patch in the output")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--joint", o.joint, "Fit the PCA on every .agft in this directory (masks: <stem>.png beside each)");
    return {sub, [&o](const Context& ctx) {
                const FeatureTensor features = read_agft(ctx.path(o.features));
                std::optional<Mask> vegetation;
                if (!o.mask.empty()) {
                    vegetation = io::read_gray(ctx.path(o.mask));
                    if (!vegetation) throw IoError("cannot read mask " + ctx.path(o.mask).string());
                }
                const Mask foreground = grid_mask(vegetation, features);

                PrincipalComponents pc;
                std::size_t fitted_on = 1;
                if (o.joint.empty()) {
                    pc = fit_pca3(features, foreground);
                } else {
                    std::vector<fs::path> files;
                    for (const auto& e : fs::directory_iterator(ctx.path(o.joint))) {
                        if (e.is_regular_file() && e.path().extension() == ".agft") files.push_back(e.path());
                    }
                    std::sort(files.begin(), files.end());
                    std::vector<double> rows;
                    for (const auto& f : files) {
                        const FeatureTensor t = read_agft(f);
                        if (t.dim != features.dim) throw DomainError("feature dimension differs in " + f.string());
                        fs::path mask_file = f;
                        mask_file.replace_extension(".png");
                        std::optional<Mask> m;
                        if (fs::exists(mask_file)) m = io::read_gray(mask_file);
                        const auto part = foreground_rows(t, grid_mask(m, t));
                        rows.insert(rows.end(), part.begin(), part.end());
                    }
                    pc = fit_pca3(rows, features.dim);
                    fitted_on = files.size();
                }
                const Image viz = upscale_nearest(render_rgb(features, pc, foreground), o.scale);
                io::write_png(ctx.path(o.out), viz);
                ojson summary = {{"grid", {features.grid_h, features.grid_w}},
                                 {"dim", features.dim},
                                 {"fitted_on", fitted_on},
                                 {"samples", pc.samples},
                                 {"shares", pc.shares}};
                ctx.write_stage_report("pcaviz", summary);
                return summary;
            }, nullptr};
}

ojson error_record(const std::string& kind, const std::string& message) {
    return {{"event", "error"}, {"kind", kind}, {"message", message}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"agricurate: dataset curation and evaluation for herbicide-trial imagery", "agricurate"};
    app.set_config("--config", "", "TOML config; [subcommand] sections set that stage's flags");
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1, 1);

    Globals globals;
    app.add_option("--workdir", globals.workdir, "Root for relative paths")->capture_default_str();
    app.add_option("--seed", globals.seed, "Global seed for seeded stages")->capture_default_str();
    app.add_option("--workers", globals.workers, "Worker threads, 0 = all cores (env AGRICURATE_WORKERS overrides)")
        ->capture_default_str();

    CurateOptions curate_o;
    SplitOptions split_o;
    TileOptions tile_o;
    VegcoverOptions vegcover_o;
    BalanceOptions balance_o;
    PrimitivesOptions primitives_o;
    WeightsOptions weights_o;
    SubsetsOptions subsets_o;
    EvalOptions eval_o;
    DeltaOptions delta_o;
    ProbeOptions probe_o;
    SelectOptions select_o;
    PcavizOptions pcaviz_o;
    const std::vector<Command> commands = {
        add_curate(app, curate_o),         add_tile(app, tile_o),       add_vegcover(app, vegcover_o),
        add_balance(app, balance_o),       add_primitives(app, primitives_o),
        add_weights(app, weights_o),       add_split(app, split_o),     add_subsets(app, subsets_o),
        add_eval(app, eval_o),             add_delta(app, delta_o),     add_probe(app, probe_o),
        add_select(app, select_o),         add_pcaviz(app, pcaviz_o)};

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << error_record("usage_error", e.what()).dump() << '\n';
        return kExitUsage;
    }

    const Command* selected = nullptr;
    for (const auto& c : commands) {
        if (c.app->parsed()) selected = &c;
    }
    if (selected == nullptr) {
        err << error_record("usage_error", "no subcommand").dump() << '\n';
        return kExitUsage;
    }

    Context ctx(globals, err);
    try {
        const std::string effective = app.config_to_str(true, false);
        ojson start = {{"event", "start"},
                       {"tool", "agricurate"},
                       {"version", kVersion},
                       {"command", selected->app->get_name()},
                       {"config_hash", sha256_hex(effective)},
                       {"seed", selected->seed ? selected->seed(ctx) : globals.seed},
                       {"workers", ctx.workers()}};
        ctx.log(start);
        const ojson summary = selected->action(ctx);
        ctx.log({{"event", "done"}, {"command", selected->app->get_name()}, {"summary", summary}});
        return kExitOk;
    } catch (const Error& e) {
        err << error_record(e.kind(), e.what()).dump() << '\n';
    } catch (const std::exception& e) {
        err << error_record("error", e.what()).dump() << '\n';
    }
    return kExitFailure;
}

}  // namespace agricurate::cli
