#include "qa2sat/store.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qa2sat/errors.hpp"
#include "qa2sat/rng.hpp"

namespace qa2sat {

namespace fs = std::filesystem;

void write_text_atomic(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open for writing: " + tmp.string());
        out << text;
        if (!out) throw Error("short write: " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_json_atomic(const fs::path& path, const nlohmann::json& j) {
    write_text_atomic(path, j.dump(1) + "\n");
}

nlohmann::json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DependencyError("cannot open: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

std::string json_hash(const nlohmann::json& j) {
    const std::uint64_t h = hash_str(j.dump());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string tsv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? '\t' : '\n');
    char buf[64];
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw ArgumentError("tsv_table: row width != header width");
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.12g", row[i]);
            out << buf << (i + 1 < row.size() ? '\t' : '\n');
        }
    }
    return out.str();
}

}  // namespace qa2sat
