#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kgmm/kernel_core.hpp"

namespace kgmm {

/// Shortest-safe round-trip text for a double ("%.17g").
std::string format_double(double value);

/// CSV with a header row: numeric feature columns plus an optional integer
/// column named `label`. Comma separated, '.' decimal point.
Dataset parse_csv(std::istream& in);
Dataset read_csv(const std::filesystem::path& path);

/// Header x0..x{d-1}[,label]; values with 17 significant digits; LF endings.
void write_csv(std::ostream& out, const Dataset& data);
void write_csv(const std::filesystem::path& path, const Dataset& data);

/// Generic numeric table with a header row.
void write_table_csv(std::ostream& out, const std::vector<std::string>& header,
                     const Eigen::MatrixXd& values);

/// Writes `text` to `path`, creating parent directories; throws Error(Io).
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace kgmm
