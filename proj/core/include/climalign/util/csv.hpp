#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace climalign::util {

// Numeric table with a single header row. Empty cells and "nan" parse to NaN;
// callers decide whether NaN is acceptable.
struct NumericTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(std::string_view name) const;
};

NumericTable read_numeric_csv(const std::filesystem::path& path);
NumericTable parse_numeric_csv(std::string_view text, const std::string& origin = "<memory>");

// Shortest round-trip representation.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace climalign::util
