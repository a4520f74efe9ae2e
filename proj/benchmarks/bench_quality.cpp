#include <benchmark/benchmark.h>

#include <random>

#include "agricurate/quality.hpp"
#include "agricurate/vegetation.hpp"

using namespace agricurate;

namespace {

Image noise(int w, int h, unsigned seed) {
    Image img(w, h, 3);
    std::mt19937 rng(seed);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng() & 0xff);
    return img;
}

void BM_Phash(benchmark::State& state) {
    const Image img = noise(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)) * 2 / 3, 1);
    for (auto _ : state) benchmark::DoNotOptimize(phash64(img));
}
BENCHMARK(BM_Phash)->Arg(518)->Arg(2000);

void BM_BlurScore(benchmark::State& state) {
    const Image img = noise(2000, 1333, 2);
    for (auto _ : state) benchmark::DoNotOptimize(blur_score(img));
}
BENCHMARK(BM_BlurScore);

void BM_ExgMask(benchmark::State& state) {
    const Image tile = noise(518, 518, 3);
    for (auto _ : state) benchmark::DoNotOptimize(exg_mask(tile));
}
BENCHMARK(BM_ExgMask);

void BM_Otsu(benchmark::State& state) {
    Histogram256 h{};
    std::mt19937 rng(4);
    for (auto& v : h) v = rng() % 10000;
    for (auto _ : state) benchmark::DoNotOptimize(otsu_threshold(h));
}
BENCHMARK(BM_Otsu);

}  // namespace
