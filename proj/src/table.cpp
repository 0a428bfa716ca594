#include "noisemix/table.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "noisemix/errors.hpp"

namespace noisemix {

Table& Table::add(std::string name, Eigen::VectorXd column) {
  if (!columns.empty() && column.size() != rows())
    throw std::invalid_argument("column '" + name + "' has a different length");
  header.push_back(std::move(name));
  columns.push_back(std::move(column));
  return *this;
}

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(std::ostream& os, const Table& table) {
  for (std::size_t c = 0; c < table.header.size(); ++c) os << (c ? "," : "") << table.header[c];
  os << '\n';
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << format_number(table.columns[c][r]);
    os << '\n';
  }
}

std::string to_csv(const Table& table) {
  std::ostringstream os;
  write_csv(os, table);
  return os.str();
}

void write_file_atomically(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path temp = path;
  temp += ".tmp";
  for (int attempt = 0; fs::exists(temp); ++attempt) {
    temp = path;
    temp += ".tmp" + std::to_string(attempt);
  }
  try {
    {
      std::ofstream out(temp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot open " + temp.string() + " for writing");
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      out.flush();
      if (!out) throw Error("failed writing " + temp.string());
    }
    fs::rename(temp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(temp, ec);
    throw;
  }
}

}  // namespace noisemix
