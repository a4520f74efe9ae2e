#include "agricurate/class_table.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agricurate/error.hpp"

namespace agricurate {

std::optional<std::uint8_t> ClassTable::find(std::string_view name) const noexcept {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<std::uint8_t>(i);
    }
    return std::nullopt;
}

std::string ClassTable::name_of(std::uint8_t index) const {
    if (index < names.size() && !names[index].empty()) return names[index];
    return std::to_string(index);
}

ClassTable parse_class_table(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("class table: ") + e.what());
    }
    ClassTable table;
    const nlohmann::json* names = &j;
    if (j.is_object()) {
        if (!j.contains("classes")) throw ParseError("class table: missing `classes`");
        names = &j.at("classes");
        if (auto it = j.find("background"); it != j.end()) {
            if (it->is_null()) {
                table.background.reset();
            } else {
                table.background = it->get<std::uint8_t>();
            }
        }
        if (auto it = j.find("ignore_value"); it != j.end()) {
            table.ignore_value = it->get<std::uint8_t>();
        }
    }
    if (!names->is_array()) throw ParseError("class table: `classes` must be an array of names");
    for (const auto& n : *names) {
        if (!n.is_string()) throw ParseError("class table: class names must be strings");
        table.names.push_back(n.get<std::string>());
    }
    if (table.names.empty()) throw ParseError("class table: no classes");
    if (table.names.size() > table.ignore_value) {
        throw ParseError("class table: class indices collide with the ignore value");
    }
    if (table.background && *table.background >= table.names.size()) {
        throw ParseError("class table: background index out of range");
    }
    return table;
}

ClassTable load_class_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open class table " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_class_table(buffer.str());
}

void LabelMask::validate() const {
    if (raster.channels() != 1) throw DomainError("label mask must have one channel");
    for (std::uint8_t v : raster.data()) {
        if (v != table.ignore_value && v >= table.size()) {
            throw DomainError("label value " + std::to_string(v) + " not in class table");
        }
    }
}

}  // namespace agricurate
