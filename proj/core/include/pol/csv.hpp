#pragma once

// CSV output with a reproducibility header:
//   # pol <version> config_hash=<hex> seed=<n>
// followed by the column header and rows. Numbers use %.9g so identical
// doubles always print identically.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace pol {

struct CsvHeader {
  std::string config_hash;
  std::uint64_t seed = 0;
};

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const CsvHeader& header, const std::vector<std::string>& columns);

  CsvWriter& cell(const std::string& v);
  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
  void end_row();

  std::size_t rows() const noexcept { return rows_; }

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::size_t pending_ = 0;
  std::size_t rows_ = 0;
  std::string line_;
};

std::string format_number(double v);

}  // namespace pol
