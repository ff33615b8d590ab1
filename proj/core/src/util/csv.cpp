#include "climalign/util/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "climalign/errors.hpp"

namespace climalign {

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::schema: return "schema";
        case ErrorKind::format: return "format";
        case ErrorKind::data: return "data";
        case ErrorKind::config: return "config";
        case ErrorKind::domain: return "domain";
        case ErrorKind::not_found: return "not_found";
        case ErrorKind::runtime: return "runtime";
    }
    return "runtime";
}

}  // namespace climalign

namespace climalign::util {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

double parse_cell(std::string_view cell, const std::string& origin, std::size_t line_no) {
    if (cell.empty() || cell == "nan" || cell == "NaN" || cell == "NA") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const char* first = cell.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw FormatError(origin + ":" + std::to_string(line_no) + ": not a number: '" + std::string(cell) + "'");
    }
    return v;
}

}  // namespace

int NumericTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

NumericTable parse_numeric_csv(std::string_view text, const std::string& origin) {
    NumericTable t;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') {
            if (end == text.size()) break;
            continue;
        }
        auto cells = split(line);
        if (t.header.empty()) {
            for (auto c : cells) t.header.emplace_back(c);
        } else {
            if (cells.size() != t.header.size())
                throw FormatError(origin + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(t.header.size()) + " cells, got " + std::to_string(cells.size()));
            std::vector<double> row;
            row.reserve(cells.size());
            for (auto c : cells) row.push_back(parse_cell(c, origin, line_no));
            t.rows.push_back(std::move(row));
        }
        if (end == text.size()) break;
    }
    if (t.header.empty()) throw FormatError(origin + ": empty file");
    return t;
}

NumericTable read_numeric_csv(const std::filesystem::path& path) {
    return parse_numeric_csv(read_file(path), path.string());
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::runtime, "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace climalign::util
