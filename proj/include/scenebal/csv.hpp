#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace scenebal {

// Writes via a temp file in the same directory, then renames into place.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Plain comma-separated values, no quoting; fields therefore must not
// contain commas or newlines (writers validate).
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Shortest representation that round-trips a float32 / double exactly.
std::string format_float(float v);
std::string format_double(double v);

double parse_double(const std::string& s, const std::string& context);
long parse_long(const std::string& s, const std::string& context);

std::vector<std::string> split(const std::string& line, char sep);

}  // namespace scenebal
