#pragma once

// CSV persistence for Dataset: header `label,f0,f1,...`, one sample per row.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "shiftdiv/divergence.hpp"

namespace shiftdiv {

// n_classes == 0 infers max(label) + 1, with a floor of 2.
Dataset parse_dataset_csv(std::istream& in, const std::string& source,
                          std::size_t n_classes = 0);
Dataset read_dataset_csv(const std::filesystem::path& path, std::size_t n_classes = 0);

void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);

}  // namespace shiftdiv
