#include "json_io.hpp"

#include <fstream>
#include <sstream>

namespace synthweight::detail {

ordered_json to_json(const GroupReport& r) {
    ordered_json j;
    j["group"] = to_string(r.group);
    j["size"] = r.size;
    j["bleu"] = {{"1", r.bleu[0]}, {"2", r.bleu[1]}, {"3", r.bleu[2]}, {"4", r.bleu[3]},
                 {"mean", r.bleu_mean}};
    j["jaccard"] = r.jaccard;
    j["distinct"] = {{"1", r.distinct[0]}, {"2", r.distinct[1]}, {"3", r.distinct[2]},
                     {"mean", r.distinct_mean}};
    j["zipf"] = r.zipf;
    return j;
}

ordered_json to_json(const std::vector<GroupReport>& reports) {
    ordered_json j = ordered_json::object();
    for (const auto& r : reports) j[std::string(to_string(r.group))] = to_json(r);
    return j;
}

nlohmann::json read_json_file(const std::filesystem::path& path, std::string_view what) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + std::string(what) + ": " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return nlohmann::json::parse(buffer.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string(what) + " " + path.string() + ": malformed JSON: " + e.what(), 0);
    }
}

std::ofstream open_output(const std::filesystem::path& path, std::string_view what) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + std::string(what) + ": " + path.string());
    return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text, std::string_view what) {
    auto out = open_output(path, what);
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

const nlohmann::json& field(const nlohmann::json& obj, const char* name) {
    if (!obj.is_object()) throw ParseError("expected a JSON object", 0);
    auto it = obj.find(name);
    if (it == obj.end()) throw ParseError("field '" + std::string(name) + "': missing", 0);
    return *it;
}

double number_field(const nlohmann::json& obj, const char* name) {
    const auto& v = field(obj, name);
    if (!v.is_number()) throw ParseError("field '" + std::string(name) + "': expected number", 0);
    return v.get<double>();
}

std::int64_t integer_field(const nlohmann::json& obj, const char* name) {
    const auto& v = field(obj, name);
    if (!v.is_number_integer()) throw ParseError("field '" + std::string(name) + "': expected integer", 0);
    return v.get<std::int64_t>();
}

}  // namespace synthweight::detail
