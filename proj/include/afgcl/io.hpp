#pragma once

#include <span>
#include <string>
#include <vector>

namespace afgcl::io {

/// Formats a double with 17 significant digits, '.' decimal separator,
/// independent of the global locale. 17 digits round-trip exactly.
std::string format_double(double value);

/// Reads a whole text file; throws std::runtime_error if it cannot be opened.
std::string read_file(const std::string& path);

/// Splits file content into lines (LF or CRLF); a trailing newline does not
/// produce an empty final line.
std::vector<std::string> split_lines(const std::string& text);

void write_file(const std::string& path, const std::string& content);

/// Parse helpers that throw with "<file>:<line>: message" context.
int parse_int(const std::string& token, const std::string& file, std::size_t line_no);
double parse_double(const std::string& token, const std::string& file, std::size_t line_no);

}  // namespace afgcl::io
