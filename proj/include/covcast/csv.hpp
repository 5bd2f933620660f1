#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace covcast {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Reads a comma-separated file without quoting support. Every row must have
/// as many cells as the header. Blank lines are skipped.
CsvTable read_csv(const std::filesystem::path& path);

CsvTable parse_csv(const std::string& text, const std::string& source = "<memory>");

void write_text(const std::filesystem::path& path, const std::string& text);

/// Shortest round-trippable decimal form; empty string for NaN.
std::string format_number(double value);

} // namespace covcast
