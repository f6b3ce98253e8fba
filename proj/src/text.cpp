#include "crashbench/text.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

namespace crashbench::text {

std::string_view trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<long long> parse_int(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string format_roundtrip(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string format_fixed(double v, int decimals) {
    std::array<char, 512> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, decimals);
    std::string out(buf.data(), ptr);
    if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
    return out;
}

std::string format_scientific(double v, int decimals) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::scientific, decimals);
    return std::string(buf.data(), ptr);
}

std::string csv_escape(std::string_view field, char delimiter) {
    if (field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

CsvReader::CsvReader(std::istream& in, char delimiter) : in_(in), delimiter_(delimiter) {}

const std::vector<std::string>& CsvReader::header() {
    if (header_read_) return header_;
    header_read_ = true;

    std::string first;
    while (first.empty() || trim(first).empty()) {
        if (!std::getline(in_, first)) throw CsvError("missing header row");
        ++physical_line_;
    }
    if (first.size() >= 3 && first.compare(0, 3, "\xEF\xBB\xBF") == 0) first.erase(0, 3);
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (delimiter_ == 0) {
        delimiter_ = (first.find('\t') != std::string::npos && first.find(',') == std::string::npos) ? '\t' : ',';
    }

    std::set<std::string> seen;
    for (auto& name : split(first, delimiter_)) {
        std::string col(trim(name));
        if (col.size() >= 2 && col.front() == '"' && col.back() == '"') col = col.substr(1, col.size() - 2);
        if (col.empty()) throw CsvError("empty column name in header");
        if (!seen.insert(col).second) throw CsvError("duplicate column '" + col + "' in header");
        header_.push_back(std::move(col));
    }
    return header_;
}

bool CsvReader::next(std::vector<std::string>& row) {
    header();
    while (read_record(row)) {
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        return true;
    }
    return false;
}

bool CsvReader::read_record(std::vector<std::string>& out) {
    out.clear();
    std::string line;
    if (!std::getline(in_, line)) return false;
    ++physical_line_;
    row_line_ = physical_line_;

    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    while (true) {
        if (i >= line.size()) {
            if (quoted) {
                if (!std::getline(in_, line)) throw CsvError("unterminated quoted field starting on line " + std::to_string(row_line_));
                ++physical_line_;
                field += '\n';
                i = 0;
                continue;
            }
            break;
        }
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && trim(field).empty()) {
            field.clear();
            quoted = true;
        } else if (c == delimiter_) {
            out.push_back(std::move(field));
            field.clear();
        } else if (c == '\r' && i + 1 == line.size()) {
            // CRLF line ending
        } else {
            field += c;
        }
        ++i;
    }
    out.push_back(std::move(field));
    return true;
}

}  // namespace crashbench::text
