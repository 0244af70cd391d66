#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace arc::ml {

// Row-major feature matrix with binary labels.
struct Dataset {
  std::vector<std::string> columns;  // feature names, label column excluded
  std::size_t rows = 0;
  std::size_t width = 0;
  std::vector<double> x;
  std::vector<std::int64_t> y;

  std::vector<double> labels_real() const { return {y.begin(), y.end()}; }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * width, width}; }
  // Rows [lo, lo + n) as a new dataset.
  Dataset slice(std::size_t lo, std::size_t n) const;
  static Dataset concat(std::span<const Dataset> parts);
};

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Header row, float feature columns, integer 0/1 label in the last column.
Dataset read_csv(std::istream& in);
Dataset load_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const Dataset& d);

// Synthetic census-style table with six features scaled to [0, 1]: age,
// education years, weekly hours, capital-gain flag, sex, married. The label
// comes from a fixed logistic score plus noise.
Dataset adult_like(std::size_t rows, std::uint64_t seed);

inline constexpr std::uint64_t kAdultToySeed = 20240601;
inline constexpr std::size_t kAdultToyRows = 64;

}  // namespace arc::ml
