#include "shiftdiv/dataset_io.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

#include "shiftdiv/error.hpp"
#include "text_util.hpp"

namespace shiftdiv {

Dataset parse_dataset_csv(std::istream& in, const std::string& source, std::size_t n_classes) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv(line);
    if (!fields) throw ParseError(source, line_no, "unterminated quote in header");
    header = std::move(*fields);
    break;
  }
  if (header.empty()) throw ParseError(source, 0, "empty file, expected header label,f0,...");
  if (header.size() < 2 || header[0] != "label") {
    throw ParseError(source, line_no, "header must be label,f0,f1,...");
  }
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j] != "f" + std::to_string(j - 1)) {
      throw ParseError(source, line_no,
                       "header column " + std::to_string(j) + " must be f" + std::to_string(j - 1));
    }
  }
  const std::size_t dim = header.size() - 1;

  std::vector<std::size_t> labels;
  std::vector<double> features;
  std::vector<std::size_t> row_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv(line);
    if (!fields) throw ParseError(source, line_no, "unterminated quote");
    if (fields->size() != header.size()) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields->size()));
    }
    auto label = detail::parse_index((*fields)[0]);
    if (!label) throw ParseError(source, line_no, "label must be a non-negative integer");
    labels.push_back(*label);
    row_lines.push_back(line_no);
    for (std::size_t j = 1; j < fields->size(); ++j) {
      auto v = detail::parse_double((*fields)[j]);
      if (!v) throw ParseError(source, line_no, "non-numeric feature f" + std::to_string(j - 1));
      features.push_back(*v);
    }
  }
  if (labels.empty()) throw ParseError(source, line_no, "no samples after header");

  if (n_classes == 0) {
    n_classes = std::max<std::size_t>(2, *std::max_element(labels.begin(), labels.end()) + 1);
  }
  Dataset data(dim, n_classes, source);
  data.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= n_classes) {
      throw ParseError(source, row_lines[i],
                       "label " + std::to_string(labels[i]) + " exceeds declared class count " +
                           std::to_string(n_classes));
    }
    data.add(std::span<const double>(features.data() + i * dim, dim), labels[i]);
  }
  return data;
}

Dataset read_dataset_csv(const std::filesystem::path& path, std::size_t n_classes) {
  auto in = detail::open_input(path);
  return parse_dataset_csv(in, path.string(), n_classes);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "label";
  for (std::size_t j = 0; j < data.dim(); ++j) out << ",f" << j;
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.label(i);
    for (double v : data.features(i)) out << ',' << detail::format_double(v);
    out << '\n';
  }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  auto out = detail::open_output(path);
  write_dataset_csv(out, data);
}

}  // namespace shiftdiv
