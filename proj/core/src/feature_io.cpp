#include "agricurate/feature_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "agricurate/error.hpp"
#include "agricurate/image_io.hpp"

namespace agricurate {

void FeatureTensor::validate() const {
    if (values.size() != patches() * dim) {
        throw DomainError("feature tensor holds " + std::to_string(values.size()) +
                          " values, expected grid_h*grid_w*dim = " +
                          std::to_string(patches() * dim));
    }
    for (float v : values) {
        if (!std::isfinite(v)) throw DomainError("feature tensor contains a non-finite value");
    }
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes[at + i]} << (8 * i);
    return v;
}

}  // namespace

std::vector<std::uint8_t> encode_agft(const FeatureTensor& tensor) {
    tensor.validate();
    std::vector<std::uint8_t> out(std::begin(kAgftMagic), std::end(kAgftMagic));
    out.push_back(1);  // version
    out.push_back(1);  // dtype: f32
    out.push_back(0);
    out.push_back(0);
    put_u32(out, tensor.grid_h);
    put_u32(out, tensor.grid_w);
    put_u32(out, tensor.dim);
    out.reserve(out.size() + 4 * tensor.values.size());
    for (float v : tensor.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

FeatureTensor decode_agft(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kAgftHeaderSize) throw ParseError("agft: truncated header");
    if (std::memcmp(bytes.data(), kAgftMagic, 4) != 0) throw ParseError("agft: bad magic");
    if (bytes[4] != 1) throw ParseError("agft: unsupported version " + std::to_string(bytes[4]));
    if (bytes[5] != 1) throw ParseError("agft: unsupported dtype " + std::to_string(bytes[5]));
    if (bytes[6] != 0 || bytes[7] != 0) throw ParseError("agft: reserved bytes must be zero");
    FeatureTensor t;
    t.grid_h = get_u32(bytes, 8);
    t.grid_w = get_u32(bytes, 12);
    t.dim = get_u32(bytes, 16);
    const std::uint64_t count = std::uint64_t{t.grid_h} * t.grid_w * t.dim;
    if (bytes.size() - kAgftHeaderSize != count * 4) {
        throw ParseError("agft: payload is " + std::to_string(bytes.size() - kAgftHeaderSize) +
                         " bytes, header implies " + std::to_string(count * 4));
    }
    t.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        t.values[i] = std::bit_cast<float>(get_u32(bytes, kAgftHeaderSize + 4 * i));
    }
    t.validate();
    return t;
}

FeatureTensor read_agft(const std::filesystem::path& path) {
    const auto bytes = io::read_file_bytes(path);
    try {
        FeatureTensor t = decode_agft(bytes);
        t.source = path.filename().string();
        return t;
    } catch (const Error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_agft(const std::filesystem::path& path, const FeatureTensor& tensor) {
    io::write_file_bytes(path, encode_agft(tensor));
}

std::vector<double> mean_pool(const FeatureTensor& tensor) {
    tensor.validate();
    if (tensor.patches() == 0) throw DomainError("mean_pool of an empty patch grid");
    std::vector<double> pooled(tensor.dim, 0.0);
    for (std::size_t p = 0; p < tensor.patches(); ++p) {
        auto patch = tensor.patch(p);
        for (std::size_t d = 0; d < tensor.dim; ++d) pooled[d] += patch[d];
    }
    for (double& v : pooled) v /= static_cast<double>(tensor.patches());
    return pooled;
}

}  // namespace agricurate
