#pragma once

#include <string>
#include <vector>

namespace qaction {

/// RFC 4180 field: quoted when it holds a comma, quote, CR or LF.
std::string csv_escape(const std::string& field);

/// Shortest "%.*g" form that round-trips, so equal values give equal bytes.
std::string csv_number(double v);

/// Rows are accumulated in memory and written with CRLF line ends.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row(std::vector<std::string> fields);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace qaction
