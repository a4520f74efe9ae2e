// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any
// criterion fails. Each check reports the measured numbers it judged.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "agricurate/class_table.hpp"
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
#include "agricurate/weights.hpp"
#include "gen.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"

using namespace agricurate;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects sub-check outcomes; the first failures become the detail text.
class Verdict {
public:
    void expect(bool ok, const std::string& what) {
        if (ok) return;
        ++failures_;
        if (failures_ <= 3) failed_.push_back(what);
    }
    void note(const std::string& text) { notes_.push_back(text); }
    bool ok() const { return failures_ == 0; }
    std::string detail() const {
        std::string out;
        for (const auto& n : notes_) out += (out.empty() ? "" : "; ") + n;
        for (const auto& f : failed_) out += (out.empty() ? "" : "; ") + std::string("failed: ") + f;
        if (failures_ > 3) out += "; +" + std::to_string(failures_ - 3) + " more";
        return out;
    }

private:
    int failures_ = 0;
    std::vector<std::string> failed_;
    std::vector<std::string> notes_;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

ClassTable numbered_table(std::size_t k) {
    ClassTable t;
    for (std::size_t i = 0; i < k; ++i) t.names.push_back("k" + std::to_string(i));
    return t;
}

DatasetManifest collections(const std::vector<std::pair<std::string, int>>& sizes) {
    DatasetManifest m;
    for (const auto& [name, n] : sizes) {
        for (int i = 0; i < n; ++i) {
            ImageRecord r;
            r.id = r.path = name + "/IMG_" + std::to_string(1000 + i) + ".jpg";
            r.sha256 = std::string(64, '0');
            r.width = 5472;
            r.height = 3648;
            r.collection = name;
            m.records.push_back(r);
        }
    }
    return m;
}

// --- criteria ---------------------------------------------------------------

Verdict split_arithmetic() {
    Verdict v;
    const auto m = collections({{"2019A2", 147}, {"2020B1", 282}});
    SplitSpec spec;
    spec.rules = {parse_split_rule("2019A2:1,0,0"), parse_split_rule("2020B1:0.8,0.1,0.1")};
    spec.seed = 0;
    const auto t0 = Clock::now();
    const auto out = assign_splits(m, spec);
    const double secs = seconds_since(t0);
    const auto train = out.count(Split::train);
    v.note("train=" + std::to_string(train) + " val=" + std::to_string(out.count(Split::val)) +
           " test=" + std::to_string(out.count(Split::test)) + " in " + fmt("%.4f s", secs));
    v.expect(train == 373, "train count");
    v.expect(secs < 1.0, "runtime");
    return v;
}

Verdict reduction_anchors() {
    Verdict v;
    const double a = reduction_percent(2449, 429);
    const double b = reduction_percent(2393, 373);
    v.note(fmt("%.4f", a) + ", " + fmt("%.4f", b));
    v.expect(std::abs(a - 82.48) <= 0.005, "(2449,429)");
    v.expect(std::abs(b - 84.41) <= 0.01, "(2393,373)");
    return v;
}

Verdict subsets() {
    Verdict v;
    auto m = collections({{"2019A2", 147}, {"2020B1", 282}});
    for (auto& r : m.records) r.split = Split::train;
    const std::vector<std::size_t> counts = {25, 50, 75, 100, 147};
    const std::vector<std::size_t> totals = {50, 100, 150, 200, 294};
    const auto s = efficiency_subsets(m, counts, 7);
    std::string got;
    for (std::size_t i = 0; i < s.size(); ++i) {
        got += (i ? "," : "") + std::to_string(s[i].size());
        v.expect(s[i].size() == totals[i], "total " + std::to_string(i));
        if (i > 0) {
            std::set<std::string> small, big;
            for (const auto& r : s[i - 1].records) small.insert(r.id);
            for (const auto& r : s[i].records) big.insert(r.id);
            v.expect(std::includes(big.begin(), big.end(), small.begin(), small.end()), "nested");
        }
    }
    v.note("totals [" + got + "]");
    v.expect(efficiency_subsets(m, counts, 7) == s, "deterministic");
    v.expect(efficiency_subsets(m, counts, 8) != s, "seed changes membership");
    return v;
}

Verdict weights() {
    Verdict v;
    double worst = 0.0;
    for (double beta : {0.0, 0.9, 0.99, 0.999}) {
        for (std::uint64_t n = 0; n <= 10000; ++n) {
            const double expected = oracle::geometric_sum(n, beta);
            const double got = effective_number(n, beta);
            const double rel = expected == 0.0 ? std::abs(got) : std::abs(got - expected) / expected;
            worst = std::max(worst, rel);
        }
    }
    v.note("max relative error " + fmt("%.2e", worst));
    v.expect(worst <= 1e-9, "effective number oracle");

    // symmetry: equal counts give equal weights; swapping counts swaps weights
    gen::Source src(42);
    for (int i = 0; i < 50; ++i) {
        const std::uint64_t a = src.range(1, 100000), b = src.range(1, 100000);
        ClassPixelCounts c1{{{"x", a}, {"y", b}, {"z", a}}};
        ClassPixelCounts c2{{{"x", b}, {"y", a}, {"z", a}}};
        const auto w1 = class_weights(c1, 0.999);
        const auto w2 = class_weights(c2, 0.999);
        v.expect(w1.weights.at("x") == w1.weights.at("z"), "equal counts");
        v.expect(std::abs(w1.weights.at("x") - w2.weights.at("y")) <= 1e-12 &&
                     std::abs(w1.weights.at("y") - w2.weights.at("x")) <= 1e-12,
                 "swap symmetry");
        const auto u = class_weights(c1, 0.0);
        for (const auto& [name, w] : u.weights) v.expect(w == 1.0, "beta=0 uniform");
    }
    return v;
}

Verdict f1_suite() {
    Verdict v;
    ConfusionMatrix diag(numbered_table(3));
    diag(0, 0) = 12;
    diag(1, 1) = 7;
    diag(2, 2) = 99;
    v.expect(f1_scores(diag).macro == 1.0, "diagonal macro");

    ConfusionMatrix two(numbered_table(2));
    two(0, 0) = 50;
    two(0, 1) = 10;
    two(1, 0) = 10;
    two(1, 1) = 30;
    const auto f = f1_scores(two);
    v.note("[[50,10],[10,30]] -> " + fmt("%.4f", f.per_class.at(0)) + ", " + fmt("%.4f", f.per_class.at(1)) +
           ", macro " + fmt("%.4f", f.macro));
    v.expect(std::abs(f.per_class.at(0) - 0.8333) <= 1e-4, "class 0");
    v.expect(std::abs(f.per_class.at(1) - 0.75) <= 1e-4, "class 1");
    v.expect(std::abs(f.macro - 0.7917) <= 1e-4, "macro");

    gen::Source src(88);
    std::vector<ConfusionMatrix> shards;
    ConfusionMatrix whole(numbered_table(4));
    for (int i = 0; i < 100; ++i) {
        const Mask gt = src.label_mask(8, 8, 4, 0.1);
        const Mask pred = src.label_mask(8, 8, 4);
        ConfusionMatrix cm(numbered_table(4));
        accumulate(LabelMask{gt, numbered_table(4)}, LabelMask{pred, numbered_table(4)}, cm);
        const auto want = oracle::confusion(gt, pred, 4, 255);
        bool same = true;
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) same = same && cm(a, b) == want[a][b];
        v.expect(same, "tally pair " + std::to_string(i));
        accumulate(LabelMask{gt, numbered_table(4)}, LabelMask{pred, numbered_table(4)}, whole);
        shards.push_back(cm);
    }
    ConfusionMatrix left(numbered_table(4)), right(numbered_table(4)), tail(numbered_table(4));
    for (const auto& s : shards) left.merge(s);
    for (auto it = shards.rbegin(); it != shards.rend(); ++it) right.merge(*it);
    for (std::size_t i = 50; i < shards.size(); ++i) tail.merge(shards[i]);
    ConfusionMatrix grouped(numbered_table(4));
    for (std::size_t i = 0; i < 50; ++i) grouped.merge(shards[i]);
    grouped.merge(tail);
    v.expect(left == whole && right == whole && grouped == whole, "shard merge");
    return v;
}

Verdict tiler_laws() {
    Verdict v;
    gen::Source src(518);
    for (int i = 0; i < 1000; ++i) {
        const int w = src.range(1, 6000), h = src.range(1, 6000);
        const int s = src.chance(0.2) ? src.range(1, 8) : src.range(1, 1200);
        const auto g = tile_grid(w, h, s);
        v.expect(g.size() == static_cast<std::size_t>(w / s) * static_cast<std::size_t>(h / s),
                 "count law at " + std::to_string(w) + "x" + std::to_string(h) + "/" + std::to_string(s));
    }
    Image img(1100, 700, 3);
    for (int y = 0; y < 700; ++y)
        for (int x = 0; x < 1100; ++x) {
            img.at(x, y, 0) = static_cast<std::uint8_t>(x % 256);
            img.at(x, y, 1) = static_cast<std::uint8_t>(y % 256);
            img.at(x, y, 2) = static_cast<std::uint8_t>((x / 256) * 16 + y / 256);
        }
    const auto offsets = tile_grid(1100, 700, 300);
    const auto tiles = extract_tiles(img, offsets, 300);
    bool exact = true;
    for (std::size_t t = 0; t < tiles.size(); ++t)
        for (int j = 0; j < 300; ++j)
            for (int i = 0; i < 300; ++i)
                for (int c = 0; c < 3; ++c)
                    exact = exact && tiles[t].at(i, j, c) == img.at(offsets[t].x0 + i, offsets[t].y0 + j, c);
    v.expect(exact, "pixel-exact crops");
    v.note("1000 count-law cases, " + std::to_string(tiles.size()) + " gradient tiles checked");
    return v;
}

// 1000 synthetic 2000x2000 images: grid, extraction and lossless PNG encoding of
// every tile, on all available cores. The run stops once the 60 s budget is
// spent; the remaining time is then projected from the measured rate.
Verdict tiler_throughput() {
    Verdict v;
    constexpr int kImages = 1000;
    constexpr int kSide = 2000;
    constexpr double kBudget = 60.0;
    const int workers = resolve_workers(0);
    const unsigned cores = std::max(1u, std::thread::hardware_concurrency());

    Image base(kSide, kSide, 3);
    gen::Source src(2000);
    for (int y = 0; y < kSide; ++y)
        for (int x = 0; x < kSide; ++x) {
            const int n = static_cast<int>(src.bits() & 15);
            base.at(x, y, 0) = static_cast<std::uint8_t>(x / 8 + n);
            base.at(x, y, 1) = static_cast<std::uint8_t>(y / 8 + n);
            base.at(x, y, 2) = static_cast<std::uint8_t>((x + y) / 16 + n);
        }

    std::atomic<int> done{0};
    std::atomic<std::size_t> tiles{0};
    std::atomic<bool> over{false};
    const auto t0 = Clock::now();
    parallel_for(kImages, workers, [&](std::size_t i) {
        if (over.load()) return;
        Image img = base;  // each image differs in its first row
        for (int x = 0; x < kSide; ++x) img.at(x, 0, 0) = static_cast<std::uint8_t>(i + x);
        const auto offsets = tile_grid(kSide, kSide, 518);
        std::size_t bytes = 0;
        for (const auto& t : extract_tiles(img, offsets, 518)) bytes += io::encode_png(t).size();
        if (bytes == 0) return;
        tiles += offsets.size();
        ++done;
        if (seconds_since(t0) > kBudget) over = true;
    });
    const double secs = seconds_since(t0);
    const int n = done.load();
    const double projected = n > 0 ? secs * kImages / n : INFINITY;
    v.note(std::to_string(n) + "/" + std::to_string(kImages) + " images (" + std::to_string(tiles.load()) +
           " tiles) in " + fmt("%.1f s", secs) + " on " + std::to_string(workers) + " worker(s), " +
           std::to_string(cores) + " core(s); projected " + fmt("%.1f s", projected) + " for all; " +
           fmt("%.1f s", projected * workers / 8.0) + " if 8 cores scaled linearly");
    v.expect(n == kImages && secs < kBudget, "1000 images within 60 s on this machine");
    if (cores < 8) v.note("criterion assumes 8 cores, this machine has " + std::to_string(cores));
    return v;
}

Verdict quality() {
    Verdict v;
    gen::TempDir dir("acc_quality");
    gen::Source src(99);
    std::vector<std::vector<std::uint8_t>> originals;
    for (int i = 0; i < 40; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "a_%03d.png", i);
        const auto bytes = io::encode_png(gen::smooth_scene(src, 96, 72));
        io::write_file_bytes(dir / "img" / name, bytes);
        originals.push_back(bytes);
    }
    std::set<std::string> copies;
    for (int i = 0; i < 40; i += 2) {
        char name[32];
        std::snprintf(name, sizeof name, "z_copy_%03d.png", i);
        io::write_file_bytes(dir / "img" / name, originals[i]);
        copies.insert(name);
    }
    QualityConfig config;
    config.blur_threshold = 0.0;
    config.dark_threshold = 0.0;
    const auto scanned = scan_images(dir / "img");
    const auto curated = curate(scanned, dir / "img", config, 1);
    std::size_t flagged = 0;
    for (const auto& r : curated.records)
        if (copies.count(r.id) && r.status == Status::duplicate) ++flagged;
    v.note("duplicates flagged " + std::to_string(flagged) + "/" + std::to_string(copies.size()));
    v.expect(flagged == copies.size(), "duplicates");

    gen::Source ps(2024);
    int close = 0;
    for (int i = 0; i < 100; ++i) {
        const Image img = gen::smooth_scene(ps, 160, 120);
        const auto decoded = io::decode_rgb(io::encode_jpeg(img, 90));
        if (decoded && hamming(phash64(img), phash64(*decoded)) <= 10) ++close;
    }
    int apart = 0;
    for (int i = 0; i < 100; ++i)
        if (hamming(phash64(ps.noise_image(64, 64)), phash64(ps.noise_image(64, 64))) > 10) ++apart;
    v.note("q90 within 10: " + std::to_string(close) + "/100, noise beyond 10: " + std::to_string(apart) + "/100");
    v.expect(close >= 95, "jpeg re-encodes");
    v.expect(apart >= 99, "noise pairs");

    const auto again = curate(curated, dir / "img", config, 1);
    v.expect(again == curated, "curate idempotent");
    return v;
}

Verdict vegetation() {
    Verdict v;
    gen::Source src(256);
    int agree = 0;
    for (int i = 0; i < 100; ++i) {
        Histogram256 h{};
        if (i % 2 == 0) {
            for (auto& x : h) x = src.range(0, 1000);
        } else {
            const double m1 = src.real(0, 128), m2 = src.real(128, 255);
            for (int k = 0; k < 5000; ++k) {
                const double m = src.chance(0.3) ? m1 : m2;
                h[std::clamp(static_cast<int>(m + 15 * src.gauss()), 0, 255)] += 1;
            }
        }
        agree += otsu_threshold(h) == oracle::otsu_exhaustive(h);
    }
    v.note("Otsu agrees " + std::to_string(agree) + "/100");
    v.expect(agree == 100, "Otsu");

    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        gen::Source bs(seed);
        VegetationConfig config;
        config.seed = seed;
        std::vector<std::size_t> sizes;
        DatasetManifest m;
        for (std::size_t b = 0; b < config.bin_count(); ++b) {
            sizes.push_back(bs.range(0, 60));
            for (std::size_t i = 0; i < sizes.back(); ++i) {
                ImageRecord r;
                r.id = r.path = "t" + std::to_string(b) + "_" + std::to_string(i);
                r.sha256 = std::string(64, '0');
                if (b == 0) {
                    r.veg_coverage = 0.0;
                } else {
                    const double lo = config.bin_edges[b - 1], hi = config.bin_edges[b];
                    r.veg_coverage = lo + (hi - lo) * (1.0 - bs.unit());
                }
                m.records.push_back(r);
            }
        }
        if (m.records.empty()) continue;
        config.target_total = bs.range(1, 400);
        const auto res = balance(m, config);
        std::size_t available = 0;
        for (std::size_t b = 0; b < res.bins.size(); ++b) {
            v.expect(res.bins[b].available == sizes[b], "bin size");
            v.expect(res.bins[b].selected == std::min(res.quota, sizes[b]), "per-bin min(size, quota)");
            available += res.bins[b].available;
        }
        v.expect(available == m.size(), "histogram conservation");
    }
    return v;
}

Verdict primitives() {
    Verdict v;
    gen::Source src(16);
    int cases = 0;
    for (int i = 0; i < 100; ++i) {
        const int classes = src.range(2, 5);
        const Mask m = src.label_mask(16, 16, classes, i % 3 == 0 ? 0.1 : 0.0);
        const ClassTable t = numbered_table(static_cast<std::size_t>(classes));
        for (int conn : {4, 8}) {
            auto blobs = connected_components(LabelMask{m, t}, conn == 4 ? Connectivity::four : Connectivity::eight);
            const auto expected = oracle::flood_fill(m, conn, 0, 255);
            std::sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) { return a.first_pixel < b.first_pixel; });
            bool same = blobs.size() == expected.size();
            for (std::size_t k = 0; same && k < blobs.size(); ++k) {
                const auto& e = expected[k];
                same = blobs[k].label == e.label && blobs[k].area == e.pixels.size() &&
                       blobs[k].first_pixel == *e.pixels.begin() &&
                       blobs[k].bbox == BoundingBox{e.x0, e.y0, e.x1 - e.x0 + 1, e.y1 - e.y0 + 1};
            }
            v.expect(same, "flood fill mask " + std::to_string(i) + " conn " + std::to_string(conn));
            std::map<int, std::size_t> pixels, areas;
            for (auto p : m.data())
                if (p != 0 && p != 255) ++pixels[p];
            for (const auto& b : blobs) areas[b.label] += b.area;
            v.expect(pixels == areas, "area conservation");
            ++cases;
        }
    }
    v.note(std::to_string(cases) + " mask/connectivity cases");
    return v;
}

ProbeDataset probe_clusters(gen::Source& src, std::size_t k, std::size_t per, std::size_t dim, double spread,
                            double noise) {
    ProbeDataset d;
    d.dim = dim;
    for (std::size_t c = 0; c < k; ++c) d.class_names.push_back("c" + std::to_string(c));
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t i = 0; i < per; ++i) {
            std::vector<double> x(dim);
            for (double& e : x) e = noise * src.gauss();
            x[c % dim] += spread;
            d.add(x, c, "c" + std::to_string(c) + "_" + std::to_string(i));
        }
    return d;
}

Verdict probe() {
    Verdict v;
    gen::Source src(3);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t k = src.range(2, 4), dim = src.range(1, 5);
        const auto data = probe_clusters(src, k, 6, dim, 1.5, 1.0);
        std::vector<double> w(k * dim), b(k);
        for (double& x : w) x = 0.5 * src.gauss();
        for (double& x : b) x = 0.5 * src.gauss();
        const double l2 = trial % 2 ? 0.01 : 0.0;
        const auto at = probe_objective(w, b, data, k, l2);
        const double h = 1e-5;
        auto check = [&](std::vector<double>& p, std::size_t j, double analytic) {
            const double keep = p[j];
            p[j] = keep + h;
            const double up = probe_objective(w, b, data, k, l2).loss;
            p[j] = keep - h;
            const double down = probe_objective(w, b, data, k, l2).loss;
            p[j] = keep;
            const double fd = (up - down) / (2 * h);
            // relative, with a floor so that vanishing components are judged absolutely
            worst = std::max(worst, std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-3}));
        };
        for (std::size_t j = 0; j < w.size(); ++j) check(w, j, at.grad_weights[j]);
        for (std::size_t j = 0; j < b.size(); ++j) check(b, j, at.grad_bias[j]);
    }
    v.note("max gradient relative error " + fmt("%.2e", worst));
    v.expect(worst <= 1e-4, "finite differences");

    gen::Source sep(11);
    const auto data = probe_clusters(sep, 3, 40, 4, 12.0, 0.5);
    const auto split = stratified_split(data, 0.25, 5);
    const auto model = train_probe(split.train);
    const double acc = evaluate_probe(model, split.holdout);
    v.note("separable holdout accuracy " + fmt("%.3f", acc));
    v.expect(acc == 1.0, "separable accuracy");

    std::vector<CheckpointScore> runs = {{10, 0.71}, {20, 0.74}, {30, 0.72}, {40, 0.74}, {50, 0.69}};
    v.expect(select_checkpoint(runs) == 20, "argmax with tie to smaller epoch");
    std::reverse(runs.begin(), runs.end());
    v.expect(select_checkpoint(runs) == 20, "order independence");

    gen::Source a(9), b(9);
    ProbeConfig config;
    config.epochs = 100;
    config.seed = 4;
    const auto da = probe_clusters(a, 3, 20, 6, 2.0, 1.0);
    const auto db = probe_clusters(b, 3, 20, 6, 2.0, 1.0);
    const auto sa = stratified_split(da, 0.2, config.seed);
    const auto sb = stratified_split(db, 0.2, config.seed);
    const auto m1 = train_probe(sa.train, config);
    const auto m2 = train_probe(sb.train, config);
    v.expect(sa.holdout.ids == sb.holdout.ids && m1.weights == m2.weights && m1.bias == m2.bias, "bit determinism");
    return v;
}

Verdict pca() {
    Verdict v;
    gen::Source src(7);
    const std::size_t n = 10000;
    std::vector<double> rows;
    rows.reserve(n * 3);
    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back(3.0 * src.gauss());
        rows.push_back(2.0 * src.gauss());
        rows.push_back(1.0 * src.gauss());
    }
    const auto pc = fit_pca3(rows, 3);
    const auto ref = oracle::covariance_eigen(rows, 3);
    const double target[3] = {9.0 / 14.0, 4.0 / 14.0, 1.0 / 14.0};
    for (std::size_t k = 0; k < 3; ++k) {
        v.expect(std::abs(pc.shares[k] - target[k]) <= 0.02, "share " + std::to_string(k));
        v.expect(std::abs(pc.shares[k] - ref.values[k] / ref.trace) <= 1e-6, "oracle share " + std::to_string(k));
    }
    v.note("shares " + fmt("%.4f", pc.shares[0]) + ", " + fmt("%.4f", pc.shares[1]) + ", " + fmt("%.4f", pc.shares[2]));

    double worst_dot = 0.0;
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = a + 1; b < 3; ++b) {
            double d = 0.0;
            for (std::size_t i = 0; i < 3; ++i) d += pc.components[a][i] * pc.components[b][i];
            worst_dot = std::max(worst_dot, std::abs(d));
        }
    v.expect(worst_dot <= 1e-6, "orthogonality");

    // rank 1: points on a line
    std::vector<double> line;
    const double u[4] = {0.6, 0.0, -0.8, 0.0};
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double t = 4.0 * src.gauss();
        s1 += t;
        s2 += t * t;
        for (double c : u) line.push_back(2.0 + t * c);
    }
    const double var = s2 / 50 - (s1 / 50) * (s1 / 50);
    const auto r1 = fit_pca3(line, 4);
    v.expect(std::abs(r1.eigenvalues[0] - var) <= 1e-9 * var, "rank-1 eigenvalue");
    v.expect(std::abs(r1.shares[0] - 1.0) <= 1e-9 && r1.shares[1] <= 1e-9, "rank-1 shares");
    v.note("max |<c_a,c_b>| " + fmt("%.1e", worst_dot));
    return v;
}

Verdict end_to_end() {
    Verdict v;
    gen::TempDir work("acc_e2e");
    const auto run = pipeline::run_fixture_pipeline(work.path());
    v.expect(run.ok, "stage " + run.failed_stage);
    if (!run.ok) return v;
    const auto diff = pipeline::compare_golden(work.path(), AGRICURATE_GOLDEN_DIR, false);
    v.note(std::to_string(pipeline::golden_artifacts().size()) + " artifacts, " + std::to_string(diff.size()) +
           " differ; " + fmt("%.1f s", run.seconds) + " single-threaded");
    for (const auto& d : diff) v.expect(false, d);
    v.expect(run.seconds < 120.0, "runtime");
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"split arithmetic: 373 train images, < 1 s", split_arithmetic},
        {"reduction_percent anchors", reduction_anchors},
        {"efficiency subsets: totals, nesting, determinism", subsets},
        {"effective number oracle, weight symmetry, beta=0 uniformity", weights},
        {"F1 suite: anchors, brute-force tally, shard merge", f1_suite},
        {"tiler: count law and pixel-exact crops", tiler_laws},
        {"tiler throughput: 1000 x 2000x2000 at s=518 in < 60 s (8 cores)", tiler_throughput},
        {"quality: duplicates, pHash robustness, idempotent curate", quality},
        {"vegetation: Otsu oracle, balance quotas, conservation", vegetation},
        {"primitives: flood-fill oracle, area conservation", primitives},
        {"probe: gradient, separability, checkpoint rule, determinism", probe},
        {"PCA: variance shares, rank-1, orthogonality", pca},
        {"end-to-end fixture reproduces goldens, < 120 s", end_to_end},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v.expect(false, std::string("exception: ") + e.what());
        }
        failed += v.ok() ? 0 : 1;
        std::printf("%s  %s  [%s]\n", v.ok() ? "PASS" : "FAIL", name.c_str(), v.detail().c_str());
        std::fflush(stdout);
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed == 0 ? 0 : 1;
}
