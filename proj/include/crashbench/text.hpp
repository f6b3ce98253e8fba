#pragma once

#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crashbench::text {

std::string_view trim(std::string_view s);
std::string upper(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Locale-independent parsing. Surrounding whitespace is ignored; trailing
/// garbage makes the parse fail.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Shortest decimal form that parses back to the same double.
std::string format_roundtrip(double v);
/// Fixed notation with `decimals` digits after the point.
std::string format_fixed(double v, int decimals);
/// Scientific notation with `decimals` mantissa digits.
std::string format_scientific(double v, int decimals);

/// Quote a field for delimited output when it contains the delimiter, a
/// quote or a line break.
std::string csv_escape(std::string_view field, char delimiter = ',');

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// RFC-4180-style reader: quoted fields may contain delimiters, doubled
/// quotes and line breaks. A UTF-8 byte order mark on the first line is
/// dropped.
class CsvReader {
public:
    /// delimiter 0 means detect from the header line (tab if it contains a
    /// tab and no comma, comma otherwise).
    explicit CsvReader(std::istream& in, char delimiter = 0);

    /// Reads the header row. Throws CsvError on an empty stream, an empty
    /// or duplicated column name.
    const std::vector<std::string>& header();

    /// Next data row; false at end of stream. Blank lines are skipped.
    /// Throws CsvError on an unterminated quoted field.
    bool next(std::vector<std::string>& row);

    /// 1-based physical line on which the last returned row started.
    std::size_t line() const { return row_line_; }
    char delimiter() const { return delimiter_; }

private:
    bool read_record(std::vector<std::string>& out);

    std::istream& in_;
    char delimiter_;
    bool header_read_ = false;
    std::vector<std::string> header_;
    std::size_t physical_line_ = 0;
    std::size_t row_line_ = 0;
};

}  // namespace crashbench::text
