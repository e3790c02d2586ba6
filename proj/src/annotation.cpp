#include "lanefit/annotation.hpp"

#include <fstream>

#include "json.hpp"

namespace lanefit {

std::vector<SceneAnnotation> read_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<SceneAnnotation> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("invalid json: ") + e.what(), line_no);
        }
        for (const char* key : {"raw_file", "h_samples", "lanes"}) {
            if (!obj.contains(key)) throw SchemaError(key, line_no);
        }
        SceneAnnotation rec;
        try {
            rec.raw_file = obj["raw_file"].get<std::string>();
            rec.h_samples = obj["h_samples"].get<std::vector<double>>();
            rec.lanes = obj["lanes"].get<std::vector<std::vector<double>>>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad field type: ") + e.what(), line_no);
        }
        for (const auto& lane : rec.lanes) {
            if (lane.size() != rec.h_samples.size()) {
                throw ParseError("lane length does not match h_samples", line_no);
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void write_annotations(const std::vector<SceneAnnotation>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (const SceneAnnotation& rec : records) {
        nlohmann::json obj;
        obj["raw_file"] = rec.raw_file;
        obj["h_samples"] = rec.h_samples;
        obj["lanes"] = rec.lanes;
        out << obj.dump() << "\n";
    }
}

}  // namespace lanefit
