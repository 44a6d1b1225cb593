#include "pol/csv.hpp"

#include <cmath>
#include <cstdio>

#include "pol/config.hpp"
#include "pol/error.hpp"

namespace pol {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const CsvHeader& header,
                     const std::vector<std::string>& columns)
    : out_(path), columns_(columns.size()) {
  if (!out_) throw DataError("cannot write " + path.string());
  out_ << "# pol " << kVersion << " config_hash=" << header.config_hash << " seed=" << header.seed << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << "\n";
}

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (pending_ == columns_) throw Error("csv: too many cells in row");
  if (v.find_first_of(",\"\n") != std::string::npos) {
    std::string quoted = "\"";
    for (char c : v) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
    line_ += (pending_ ? "," : "") + quoted + "\"";
  } else {
    line_ += (pending_ ? "," : "") + v;
  }
  ++pending_;
  return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_number(v)); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

void CsvWriter::end_row() {
  if (pending_ != columns_) {
    throw Error("csv: row has " + std::to_string(pending_) + " cells, expected " + std::to_string(columns_));
  }
  out_ << line_ << "\n";
  out_.flush();
  line_.clear();
  pending_ = 0;
  ++rows_;
}

}  // namespace pol
