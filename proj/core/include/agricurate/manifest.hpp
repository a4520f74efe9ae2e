#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agricurate {

enum class Split { train, val, test, unassigned };
enum class Status { kept, blurry, dark, duplicate, near_duplicate, decode_failed };

std::string_view to_string(Split split) noexcept;
std::string_view to_string(Status status) noexcept;
std::optional<Split> parse_split(std::string_view text) noexcept;
std::optional<Status> parse_status(std::string_view text) noexcept;

// One image or tile. Tiles carry parent_id/x0/y0/size; balanced tile sets
// carry `selected`.
struct ImageRecord {
    std::string id;
    std::string path;
    std::string sha256;
    int width = 0;
    int height = 0;
    std::string collection;
    Split split = Split::unassigned;
    Status status = Status::kept;
    std::optional<double> blur_var;
    std::optional<double> mean_luma;
    std::optional<std::uint64_t> phash;
    std::optional<double> veg_coverage;

    std::optional<std::string> parent_id;
    std::optional<int> x0;
    std::optional<int> y0;
    std::optional<int> size;
    std::optional<bool> selected;

    bool kept() const noexcept { return status == Status::kept; }

    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct DatasetManifest {
    std::vector<ImageRecord> records;

    std::size_t size() const noexcept { return records.size(); }
    std::size_t count(Status status) const noexcept;
    std::size_t count(Split split) const noexcept;

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

// Line-delimited JSON, one ImageRecord per line. Absent optionals are omitted.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(std::string_view text);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
std::string serialize_record(const ImageRecord& record);
std::string serialize_manifest(const DatasetManifest& manifest);

// Relative path with forward slashes, used as a record id.
std::string normalize_id(const std::filesystem::path& relative);

std::string phash_to_hex(std::uint64_t hash);
std::optional<std::uint64_t> phash_from_hex(std::string_view hex) noexcept;

struct SplitRule {
    std::string collection;
    double train = 1.0;
    double val = 0.0;
    double test = 0.0;
};

struct SplitSpec {
    std::vector<SplitRule> rules;
    std::uint64_t seed = 0;
};

// "2019A2:0.8,0.1,0.1"
SplitRule parse_split_rule(std::string_view text);

// Per collection: val = round-half-up(f_val * N), test = round-half-up(f_test * N),
// train takes the remainder. Kept records are permuted by a seeded shuffle of
// their sorted ids before partitioning; non-kept records become unassigned.
DatasetManifest assign_splits(const DatasetManifest& manifest, const SplitSpec& spec);

double reduction_percent(std::int64_t before, std::int64_t after);

}  // namespace agricurate
