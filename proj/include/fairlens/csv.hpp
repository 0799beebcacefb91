#pragma once

#include <optional>
#include <string>

#include "fairlens/metrics.hpp"
#include "fairlens/scm.hpp"

namespace fairlens {

// Strict CSV: comma separators, '.' decimal point, mandatory header, every
// cell numeric, no quoting.  CsvParseError messages carry row and column;
// when bindings are given, the bound columns must exist (MissingColumn) and
// group/label/prediction columns must be 0/1 (NonBinaryColumn).
Dataset load_csv(const std::string& path,
                 const std::optional<MetricBindings>& bindings = std::nullopt);

// Shortest round-trip number formatting; load_csv(write_csv(d)) reproduces
// every bit.
void write_csv(const Dataset& data, const std::string& path);

std::string csv_text(const Dataset& data);

}  // namespace fairlens
