#pragma once

// Plot-ready tabular output. CSV: one header line, numbers with 17
// significant digits, '\n' line endings.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace noisemix {

struct Table {
  std::vector<std::string> header;
  std::vector<Eigen::VectorXd> columns;

  Table& add(std::string name, Eigen::VectorXd column);
  Eigen::Index rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

std::string format_number(double value);

void write_csv(std::ostream& os, const Table& table);
std::string to_csv(const Table& table);

/// Writes to a sibling temporary file and renames it over `path`; the
/// temporary is removed if anything fails.
void write_file_atomically(const std::filesystem::path& path, const std::string& content);

}  // namespace noisemix
