#include <benchmark/benchmark.h>

#include "agricurate/image_io.hpp"
#include "agricurate/tiler.hpp"

using namespace agricurate;

namespace {

Image field(int w, int h) {
    Image img(w, h, 3);
    std::uint32_t s = 1;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            s = s * 1664525u + 1013904223u;
            const int n = static_cast<int>(s >> 28);
            img.at(x, y, 0) = static_cast<std::uint8_t>(x / 8 + n);
            img.at(x, y, 1) = static_cast<std::uint8_t>(y / 8 + n);
            img.at(x, y, 2) = static_cast<std::uint8_t>((x + y) / 16 + n);
        }
    return img;
}

void BM_ExtractTiles(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const Image img = field(side, side);
    const auto offsets = tile_grid(side, side, 518);
    for (auto _ : state) benchmark::DoNotOptimize(extract_tiles(img, offsets, 518));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(offsets.size()) * 518 * 518 * 3);
}
BENCHMARK(BM_ExtractTiles)->Arg(2000)->Arg(5472);

void BM_EncodeTilePng(benchmark::State& state) {
    const Image tile = field(518, 518);
    for (auto _ : state) benchmark::DoNotOptimize(io::encode_png(tile));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EncodeTilePng);

}  // namespace
