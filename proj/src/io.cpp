#include "kgmm/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

namespace kgmm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no) {
  T value{};
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size()) {
    throw Error(ErrorKind::InvalidArgument, "line " + std::to_string(line_no) +
                                                ": cannot parse '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [end, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf.data(), end);
}

Dataset parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::InvalidArgument, "CSV is empty");
  const auto header = split(line);
  int label_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "label") {
      if (label_col >= 0) throw Error(ErrorKind::InvalidArgument, "duplicate label column");
      label_col = static_cast<int>(c);
    }
  }
  const std::size_t features = header.size() - (label_col >= 0 ? 1 : 0);
  if (features == 0) throw Error(ErrorKind::InvalidArgument, "CSV has no feature columns");

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::InvalidArgument,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields");
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (static_cast<int>(c) == label_col) {
        labels.push_back(parse_number<int>(fields[c], line_no));
      } else {
        values.push_back(parse_number<double>(fields[c], line_no));
      }
    }
  }
  const auto rows = static_cast<Eigen::Index>(values.size() / features);
  if (rows == 0) throw Error(ErrorKind::InvalidArgument, "CSV has no data rows");
  Eigen::MatrixXd points =
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          values.data(), rows, static_cast<Eigen::Index>(features));
  if (label_col >= 0) return Dataset(std::move(points), std::move(labels));
  return Dataset(std::move(points));
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return parse_csv(in);
}

void write_csv(std::ostream& out, const Dataset& data) {
  for (Eigen::Index c = 0; c < data.dim(); ++c) out << (c ? "," : "") << 'x' << c;
  if (data.has_labels()) out << ",label";
  out << '\n';
  for (Eigen::Index r = 0; r < data.size(); ++r) {
    for (Eigen::Index c = 0; c < data.dim(); ++c) {
      out << (c ? "," : "") << format_double(data.points()(r, c));
    }
    if (data.has_labels()) out << ',' << data.labels()[static_cast<std::size_t>(r)];
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ostringstream text;
  write_csv(text, data);
  write_text_file(path, text.str());
}

void write_table_csv(std::ostream& out, const std::vector<std::string>& header,
                     const Eigen::MatrixXd& values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "header width does not match table");
  }
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      out << (c ? "," : "") << format_double(values(r, c));
    }
    out << '\n';
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace kgmm
