#include "agricurate/image_io.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace agricurate::io {
namespace fs = std::filesystem;

namespace {

std::optional<Image> from_bgr(const cv::Mat& mat) {
    // IMREAD_COLOR always yields 8-bit BGR
    if (mat.empty() || mat.type() != CV_8UC3) return std::nullopt;
    const cv::Mat& bgr = mat;
    Image image = make_rgb(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* src = bgr.ptr<std::uint8_t>(y);
        auto dst = image.row(y);
        for (int x = 0; x < bgr.cols; ++x) {
            dst[3 * x + 0] = src[3 * x + 2];
            dst[3 * x + 1] = src[3 * x + 1];
            dst[3 * x + 2] = src[3 * x + 0];
        }
    }
    return image;
}

cv::Mat to_bgr(const Image& image) {
    if (image.channels() != 3) throw DomainError("expected a 3-channel image");
    cv::Mat mat(image.height(), image.width(), CV_8UC3);
    for (int y = 0; y < image.height(); ++y) {
        auto src = image.row(y);
        auto* dst = mat.ptr<std::uint8_t>(y);
        for (int x = 0; x < image.width(); ++x) {
            dst[3 * x + 0] = src[3 * x + 2];
            dst[3 * x + 1] = src[3 * x + 1];
            dst[3 * x + 2] = src[3 * x + 0];
        }
    }
    return mat;
}

cv::Mat to_gray(const Mask& mask) {
    if (mask.channels() != 1) throw DomainError("expected a 1-channel mask");
    cv::Mat mat(mask.height(), mask.width(), CV_8UC1);
    for (int y = 0; y < mask.height(); ++y) {
        auto src = mask.row(y);
        std::copy(src.begin(), src.end(), mat.ptr<std::uint8_t>(y));
    }
    return mat;
}

const std::vector<int> kPngParams = {cv::IMWRITE_PNG_COMPRESSION, 3};

void ensure_parent(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void encode_to(const fs::path& path, const cv::Mat& mat) {
    std::vector<std::uint8_t> bytes;
    if (!cv::imencode(".png", mat, bytes, kPngParams)) {
        throw IoError("failed to encode PNG for " + path.string());
    }
    write_file_bytes(path, bytes);
}

}  // namespace

std::optional<Image> read_rgb(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) return std::nullopt;
    try {
        return from_bgr(cv::imread(path.string(), cv::IMREAD_COLOR));
    } catch (const cv::Exception&) {
        return std::nullopt;
    }
}

std::optional<Image> decode_rgb(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) return std::nullopt;
    try {
        const cv::Mat buffer(1, static_cast<int>(bytes.size()), CV_8UC1,
                             const_cast<std::uint8_t*>(bytes.data()));
        return from_bgr(cv::imdecode(buffer, cv::IMREAD_COLOR));
    } catch (const cv::Exception&) {
        return std::nullopt;
    }
}

std::optional<Mask> read_gray(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) return std::nullopt;
    cv::Mat mat;
    try {
        mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    } catch (const cv::Exception&) {
        return std::nullopt;
    }
    if (mat.empty() || mat.depth() != CV_8U || mat.channels() != 1) return std::nullopt;
    Mask mask = make_mask(mat.cols, mat.rows);
    for (int y = 0; y < mat.rows; ++y) {
        const auto* src = mat.ptr<std::uint8_t>(y);
        std::copy(src, src + mat.cols, mask.row(y).begin());
    }
    return mask;
}

void write_png(const fs::path& path, const Raster<std::uint8_t>& raster) {
    encode_to(path, raster.channels() == 1 ? to_gray(raster) : to_bgr(raster));
}

std::vector<std::uint8_t> encode_jpeg(const Image& image, int quality) {
    std::vector<std::uint8_t> bytes;
    cv::imencode(".jpg", to_bgr(image), bytes, {cv::IMWRITE_JPEG_QUALITY, quality});
    return bytes;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
    std::vector<std::uint8_t> bytes;
    cv::imencode(".png", to_bgr(image), bytes, kPngParams);
    return bytes;
}

void write_ppm(const fs::path& path, const Image& image) {
    std::string header = "P6\n" + std::to_string(image.width()) + " " +
                         std::to_string(image.height()) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), image.data().begin(), image.data().end());
    write_file_bytes(path, bytes);
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

bool is_image_file(const fs::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".ppm" ||
           ext == ".bmp" || ext == ".tif" || ext == ".tiff";
}

std::vector<fs::path> list_images(const fs::path& root) {
    std::vector<fs::path> files;
    if (!fs::is_directory(root)) throw IoError("not a directory: " + root.string());
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(), [&](const fs::path& a, const fs::path& b) {
        return a.lexically_relative(root).generic_string() <
               b.lexically_relative(root).generic_string();
    });
    return files;
}

}  // namespace agricurate::io
