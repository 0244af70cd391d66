#include "arc/ml/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "arc/algebra/rng.hpp"

namespace arc::ml {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse(const std::string& s, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw CsvError("line " + std::to_string(line) + ": cannot parse '" + s + "'");
  return v;
}

std::string shortest(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

Dataset Dataset::slice(std::size_t lo, std::size_t n) const {
  if (lo + n > rows) throw std::out_of_range("dataset slice out of range");
  Dataset d;
  d.columns = columns;
  d.rows = n;
  d.width = width;
  d.x.assign(x.begin() + static_cast<std::ptrdiff_t>(lo * width), x.begin() + static_cast<std::ptrdiff_t>((lo + n) * width));
  d.y.assign(y.begin() + static_cast<std::ptrdiff_t>(lo), y.begin() + static_cast<std::ptrdiff_t>(lo + n));
  return d;
}

Dataset Dataset::concat(std::span<const Dataset> parts) {
  Dataset d;
  if (parts.empty()) return d;
  d.columns = parts.front().columns;
  d.width = parts.front().width;
  for (const auto& p : parts) {
    if (p.width != d.width) throw std::invalid_argument("dataset widths differ");
    d.rows += p.rows;
    d.x.insert(d.x.end(), p.x.begin(), p.x.end());
    d.y.insert(d.y.end(), p.y.begin(), p.y.end());
  }
  return d;
}

Dataset read_csv(std::istream& in) {
  Dataset d;
  std::string line;
  if (!std::getline(in, line)) throw CsvError("missing header row");
  auto header = split(line);
  if (header.size() < 2) throw CsvError("need at least one feature and a label column");
  d.columns.assign(header.begin(), header.end() - 1);
  d.width = d.columns.size();
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      throw CsvError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " columns");
    for (std::size_t j = 0; j < d.width; ++j) d.x.push_back(parse<double>(cells[j], lineno));
    auto label = parse<std::int64_t>(cells.back(), lineno);
    if (label != 0 && label != 1) throw CsvError("line " + std::to_string(lineno) + ": label must be 0 or 1");
    d.y.push_back(label);
    ++d.rows;
  }
  return d;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path.string());
  return read_csv(in);
}

void write_csv(std::ostream& out, const Dataset& d) {
  for (const auto& c : d.columns) out << c << ',';
  out << "label\n";
  for (std::size_t i = 0; i < d.rows; ++i) {
    for (std::size_t j = 0; j < d.width; ++j) out << shortest(d.x[i * d.width + j]) << ',';
    out << d.y[i] << '\n';
  }
}

Dataset adult_like(std::size_t rows, std::uint64_t seed) {
  Dataset d;
  d.columns = {"age", "education", "hours", "capital_gain", "sex", "married"};
  d.width = d.columns.size();
  d.rows = rows;
  Rng rng(seed);
  auto bern = [&](double p) { return uniform_unit(rng) < p ? 1.0 : 0.0; };
  for (std::size_t i = 0; i < rows; ++i) {
    double age = static_cast<double>(17 + uniform_below(rng, 74)) / 100.0;
    double edu = static_cast<double>(1 + uniform_below(rng, 16)) / 20.0;
    double hours = static_cast<double>(10 + uniform_below(rng, 71)) / 100.0;
    double gain = bern(0.15);
    double sex = bern(0.5);
    double married = bern(0.5);
    double score = -5.7 + 3.0 * age + 4.0 * edu + 2.5 * hours + 2.0 * gain + 0.5 * sex + 1.5 * married +
                   0.5 * standard_normal(rng);
    d.x.insert(d.x.end(), {age, edu, hours, gain, sex, married});
    d.y.push_back(score > 0 ? 1 : 0);
  }
  return d;
}

}  // namespace arc::ml
