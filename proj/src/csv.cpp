#include "scenebal/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scenebal {

namespace fs = std::filesystem;

void atomic_write_text(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV '" + path.string() + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("CSV '" + path.string() + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    table.header = split(line, ',');
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != table.header.size())
            throw std::runtime_error("CSV '" + path.string() + "': row with " + std::to_string(fields.size()) +
                                     " fields, header has " + std::to_string(table.header.size()));
        table.rows.push_back(std::move(fields));
    }
    return table;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream os;
    auto emit = [&os, &path](const std::vector<std::string>& fields) {
        for (size_t i = 0; i < fields.size(); ++i) {
            if (fields[i].find_first_of(",\n\r") != std::string::npos)
                throw std::invalid_argument("CSV '" + path.string() + "': field contains separator: " + fields[i]);
            os << (i ? "," : "") << fields[i];
        }
        os << '\n';
    };
    emit(header);
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("CSV '" + path.string() + "': row width mismatch");
        emit(row);
    }
    atomic_write_text(path, os.str());
}

std::string format_float(float v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
    return buf;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& context) {
    try {
        size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(context + ": not a number: '" + s + "'");
    }
}

long parse_long(const std::string& s, const std::string& context) {
    try {
        size_t used = 0;
        const long v = std::stol(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(context + ": not an integer: '" + s + "'");
    }
}

}  // namespace scenebal
