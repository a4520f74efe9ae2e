#include "agricurate/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "agricurate/error.hpp"
#include "agricurate/hashing.hpp"
#include "agricurate/rng.hpp"

namespace agricurate {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string_view to_string(Split split) noexcept {
    switch (split) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
        case Split::unassigned: return "unassigned";
    }
    return "unassigned";
}

std::string_view to_string(Status status) noexcept {
    switch (status) {
        case Status::kept: return "kept";
        case Status::blurry: return "blurry";
        case Status::dark: return "dark";
        case Status::duplicate: return "duplicate";
        case Status::near_duplicate: return "near_duplicate";
        case Status::decode_failed: return "decode_failed";
    }
    return "kept";
}

std::optional<Split> parse_split(std::string_view text) noexcept {
    for (Split s : {Split::train, Split::val, Split::test, Split::unassigned}) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

std::optional<Status> parse_status(std::string_view text) noexcept {
    for (Status s : {Status::kept, Status::blurry, Status::dark, Status::duplicate,
                     Status::near_duplicate, Status::decode_failed}) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

std::size_t DatasetManifest::count(Status status) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        records.begin(), records.end(), [&](const ImageRecord& r) { return r.status == status; }));
}

std::size_t DatasetManifest::count(Split split) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        records.begin(), records.end(), [&](const ImageRecord& r) { return r.split == split; }));
}

std::string phash_to_hex(std::uint64_t hash) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[hash & 0xf];
        hash >>= 4;
    }
    return out;
}

std::optional<std::uint64_t> phash_from_hex(std::string_view hex) noexcept {
    if (!is_lower_hex(hex, 16)) return std::nullopt;
    std::uint64_t value = 0;
    for (char c : hex) {
        value = (value << 4) | static_cast<std::uint64_t>(c <= '9' ? c - '0' : c - 'a' + 10);
    }
    return value;
}

std::string normalize_id(const fs::path& relative) {
    return relative.lexically_normal().generic_string();
}

namespace {

json to_json(const ImageRecord& r) {
    json j;
    j["id"] = r.id;
    j["path"] = r.path;
    j["sha256"] = r.sha256;
    j["width"] = r.width;
    j["height"] = r.height;
    j["collection"] = r.collection;
    j["split"] = to_string(r.split);
    j["status"] = to_string(r.status);
    if (r.blur_var) j["blur_var"] = *r.blur_var;
    if (r.mean_luma) j["mean_luma"] = *r.mean_luma;
    if (r.phash) j["phash"] = phash_to_hex(*r.phash);
    if (r.veg_coverage) j["veg_coverage"] = *r.veg_coverage;
    if (r.parent_id) j["parent_id"] = *r.parent_id;
    if (r.x0) j["x0"] = *r.x0;
    if (r.y0) j["y0"] = *r.y0;
    if (r.size) j["size"] = *r.size;
    if (r.selected) j["selected"] = *r.selected;
    return j;
}

const std::set<std::string>& known_fields() {
    static const std::set<std::string> fields = {
        "id",        "path",       "sha256",       "width",     "height", "collection",
        "split",     "status",     "blur_var",     "mean_luma", "phash",  "veg_coverage",
        "parent_id", "x0",         "y0",           "size",      "selected"};
    return fields;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw ParseError("line " + std::to_string(line) + ": " + what);
}

template <typename T>
T required(const json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end()) fail(line, std::string("missing `") + key + "`");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        fail(line, std::string("bad type for `") + key + "`");
    }
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    if (it->is_null()) fail(line, std::string("null `") + key + "`");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        fail(line, std::string("bad type for `") + key + "`");
    }
}

ImageRecord from_json(const json& j, std::size_t line) {
    if (!j.is_object()) fail(line, "not a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!known_fields().contains(key)) fail(line, "unknown field `" + key + "`");
    }
    ImageRecord r;
    r.id = required<std::string>(j, "id", line);
    r.path = required<std::string>(j, "path", line);
    r.sha256 = required<std::string>(j, "sha256", line);
    r.width = required<int>(j, "width", line);
    r.height = required<int>(j, "height", line);
    if (r.id.empty()) fail(line, "empty `id`");
    if (!is_lower_hex(r.sha256, 64)) fail(line, "`sha256` is not 64 lowercase hex characters");
    if (r.width < 1 || r.height < 1) fail(line, "width and height must be >= 1");

    r.collection = optional_field<std::string>(j, "collection", line).value_or("");
    if (auto s = optional_field<std::string>(j, "split", line)) {
        auto parsed = parse_split(*s);
        if (!parsed) fail(line, "unknown split `" + *s + "`");
        r.split = *parsed;
    }
    if (auto s = optional_field<std::string>(j, "status", line)) {
        auto parsed = parse_status(*s);
        if (!parsed) fail(line, "unknown status `" + *s + "`");
        r.status = *parsed;
    }
    r.blur_var = optional_field<double>(j, "blur_var", line);
    if (r.blur_var && *r.blur_var < 0.0) fail(line, "`blur_var` must be >= 0");
    r.mean_luma = optional_field<double>(j, "mean_luma", line);
    if (r.mean_luma && (*r.mean_luma < 0.0 || *r.mean_luma > 255.0)) {
        fail(line, "`mean_luma` outside [0,255]");
    }
    if (auto hex = optional_field<std::string>(j, "phash", line)) {
        r.phash = phash_from_hex(*hex);
        if (!r.phash) fail(line, "`phash` is not 16 lowercase hex characters");
    }
    r.veg_coverage = optional_field<double>(j, "veg_coverage", line);
    if (r.veg_coverage && (*r.veg_coverage < 0.0 || *r.veg_coverage > 1.0)) {
        fail(line, "`veg_coverage` outside [0,1]");
    }
    r.parent_id = optional_field<std::string>(j, "parent_id", line);
    r.x0 = optional_field<int>(j, "x0", line);
    r.y0 = optional_field<int>(j, "y0", line);
    r.size = optional_field<int>(j, "size", line);
    r.selected = optional_field<bool>(j, "selected", line);
    return r;
}

}  // namespace

std::string serialize_record(const ImageRecord& record) { return to_json(record).dump(); }

std::string serialize_manifest(const DatasetManifest& manifest) {
    std::string out;
    for (const auto& r : manifest.records) {
        out += serialize_record(r);
        out += '\n';
    }
    return out;
}

DatasetManifest parse_manifest(std::string_view text) {
    DatasetManifest manifest;
    std::unordered_set<std::string> ids;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(line_no, std::string("invalid JSON: ") + e.what());
        }
        ImageRecord record = from_json(j, line_no);
        if (!ids.insert(record.id).second) {
            throw IntegrityError("line " + std::to_string(line_no) + ": duplicate id `" +
                                 record.id + "`");
        }
        manifest.records.push_back(std::move(record));
    }
    return manifest;
}

DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_manifest(buffer.str());
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest " + path.string());
    out << serialize_manifest(manifest);
}

SplitRule parse_split_rule(std::string_view text) {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
        throw ConfigError("split rule must look like COLLECTION:train,val,test");
    }
    SplitRule rule;
    rule.collection = std::string(text.substr(0, colon));
    std::string fractions(text.substr(colon + 1));
    std::replace(fractions.begin(), fractions.end(), ',', ' ');
    std::istringstream in(fractions);
    if (!(in >> rule.train >> rule.val >> rule.test) || !(in >> std::ws).eof()) {
        throw ConfigError("split rule `" + std::string(text) + "` needs three fractions");
    }
    return rule;
}

namespace {

std::size_t round_half_up(double value) {
    return static_cast<std::size_t>(std::floor(value + 0.5));
}

void validate(const SplitSpec& spec) {
    std::set<std::string> seen;
    for (const auto& rule : spec.rules) {
        for (double f : {rule.train, rule.val, rule.test}) {
            if (!(f >= 0.0 && f <= 1.0)) {
                throw ConfigError("split fractions for `" + rule.collection +
                                  "` must lie in [0,1]");
            }
        }
        if (std::abs(rule.train + rule.val + rule.test - 1.0) > 1e-9) {
            throw ConfigError("split fractions for `" + rule.collection + "` must sum to 1");
        }
        if (!seen.insert(rule.collection).second) {
            throw ConfigError("collection `" + rule.collection + "` has more than one rule");
        }
    }
}

}  // namespace

DatasetManifest assign_splits(const DatasetManifest& manifest, const SplitSpec& spec) {
    validate(spec);
    std::map<std::string, const SplitRule*> rules;
    for (const auto& rule : spec.rules) rules[rule.collection] = &rule;

    std::map<std::string, std::vector<std::size_t>> by_collection;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        const auto& r = manifest.records[i];
        if (!r.kept()) continue;
        if (!rules.contains(r.collection)) {
            throw ConfigError("no split rule matches collection `" + r.collection + "`");
        }
        by_collection[r.collection].push_back(i);
    }

    DatasetManifest out = manifest;
    for (auto& r : out.records) r.split = Split::unassigned;

    for (auto& [collection, members] : by_collection) {
        const SplitRule& rule = *rules.at(collection);
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            return manifest.records[a].id < manifest.records[b].id;
        });
        Rng rng(Rng::derive(spec.seed, fnv1a64(collection)));
        rng.shuffle(std::span<std::size_t>(members));

        const std::size_t n = members.size();
        const std::size_t n_val = std::min(n, round_half_up(rule.val * static_cast<double>(n)));
        const std::size_t n_test =
            std::min(n - n_val, round_half_up(rule.test * static_cast<double>(n)));
        const std::size_t n_train = n - n_val - n_test;
        for (std::size_t k = 0; k < n; ++k) {
            const Split split = k < n_train ? Split::train
                                : k < n_train + n_val ? Split::val
                                                      : Split::test;
            out.records[members[k]].split = split;
        }
    }
    return out;
}

double reduction_percent(std::int64_t before, std::int64_t after) {
    if (before < 1) throw DomainError("reduction_percent: `before` must be >= 1");
    if (after < 0 || after > before) {
        throw DomainError("reduction_percent: `after` must lie in [0, before]");
    }
    return 100.0 * static_cast<double>(before - after) / static_cast<double>(before);
}

}  // namespace agricurate
