#include <benchmark/benchmark.h>

#include <random>

#include "agricurate/class_table.hpp"
#include "agricurate/metrics.hpp"
#include "agricurate/pcaviz.hpp"
#include "agricurate/primitives.hpp"

using namespace agricurate;

namespace {

ClassTable table(int k) {
    ClassTable t;
    for (int i = 0; i < k; ++i) t.names.push_back("c" + std::to_string(i));
    return t;
}

// Blocky label mask so components have realistic sizes.
Mask blocks(int w, int h, int k, unsigned seed) {
    Mask m = make_mask(w, h);
    std::mt19937 rng(seed);
    for (int by = 0; by < h; by += 8)
        for (int bx = 0; bx < w; bx += 8) {
            const auto v = static_cast<std::uint8_t>(rng() % k);
            for (int y = by; y < std::min(h, by + 8); ++y)
                for (int x = bx; x < std::min(w, bx + 8); ++x) m.at(x, y) = v;
        }
    return m;
}

void BM_ConnectedComponents(benchmark::State& state) {
    const Mask m = blocks(1024, 1024, 4, 1);
    const LabelMask lm{m, table(4)};
    for (auto _ : state) benchmark::DoNotOptimize(connected_components(lm, Connectivity::eight));
}
BENCHMARK(BM_ConnectedComponents);

void BM_ConfusionAccumulate(benchmark::State& state) {
    const LabelMask gt{blocks(1024, 1024, 6, 2), table(6)};
    const LabelMask pred{blocks(1024, 1024, 6, 3), table(6)};
    for (auto _ : state) {
        ConfusionMatrix cm(table(6));
        accumulate(gt, pred, cm);
        benchmark::DoNotOptimize(cm.total());
    }
    state.SetItemsProcessed(state.iterations() * 1024 * 1024);
}
BENCHMARK(BM_ConfusionAccumulate);

void BM_Pca3(benchmark::State& state) {
    const auto dim = static_cast<std::size_t>(state.range(0));
    std::mt19937 rng(5);
    std::normal_distribution<double> g;
    std::vector<double> rows(37 * 37 * dim);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = g(rng) * (1.0 + static_cast<double>(i % dim) / dim);
    for (auto _ : state) benchmark::DoNotOptimize(fit_pca3(rows, dim));
}
BENCHMARK(BM_Pca3)->Arg(64)->Arg(384);

}  // namespace
