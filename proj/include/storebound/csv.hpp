#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace storebound {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvDocument {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws ParseError if the column is missing.
  std::size_t column(const std::string& name) const;
};

// Comma-separated, headered. Double-quoted fields may contain commas and
// doubled quotes. Blank lines are skipped. Every row must match the header
// width.
CsvDocument parse_csv(std::istream& in);
CsvDocument read_csv(const std::string& path);

// Parses a full cell as a finite double; throws ParseError naming the 1-based
// data row and column.
double parse_number(const std::string& cell, std::size_t row,
                    const std::string& column);

// Shortest string that reads back to the same double.
std::string format_double(double value);

std::string csv_escape(const std::string& field);

}  // namespace storebound
