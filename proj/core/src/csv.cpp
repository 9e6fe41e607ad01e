#include "timeless/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "timeless/error.hpp"

namespace timeless::csv {

std::string format_double(double x) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), x);
  return std::string(buffer, result.ptr);
}

Table::Table(std::vector<std::string> header) : header_(std::move(header)) {}

Table& Table::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  return row(cells);
}

Table& Table::row(const std::vector<std::string>& values) {
  if (values.size() != header_.size()) {
    fail(ErrorCode::DimensionMismatch, "CSV row has " + std::to_string(values.size()) +
                                           " cells, header has " +
                                           std::to_string(header_.size()));
  }
  rows_.push_back(values);
  return *this;
}

namespace {

void write_line(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream stream(line);
  std::string cell;
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin != end && *begin == ' ') ++begin;
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end) {
    fail(ErrorCode::Config, "not a number: '" + text + "'");
  }
  return value;
}

std::vector<std::string> coordinate_header(Eigen::Index dim, const std::string& last) {
  const Eigen::Index k = dim / 2;
  std::vector<std::string> header;
  for (Eigen::Index i = 1; i <= k; ++i) header.push_back("q" + std::to_string(i));
  for (Eigen::Index i = 1; i <= k; ++i) header.push_back("p" + std::to_string(i));
  header.push_back(last);
  return header;
}

}  // namespace

void Table::write(std::ostream& out) const {
  write_line(out, header_);
  for (const auto& r : rows_) write_line(out, r);
}

void Table::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Config, "cannot open '" + path + "' for writing");
  write(out);
}

void write_density(std::ostream& out, const classical::PhaseSpaceDensity& rho) {
  const Eigen::Index dim = rho.dim();
  if (rho.is_samples()) {
    const auto& s = rho.samples();
    write_line(out, coordinate_header(dim, "weight"));
    std::vector<std::string> cells(static_cast<std::size_t>(dim) + 1);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      for (Eigen::Index a = 0; a < dim; ++a) {
        cells[static_cast<std::size_t>(a)] = format_double(s.points(a, i));
      }
      cells.back() = format_double(s.weights(i));
      write_line(out, cells);
    }
    return;
  }
  const auto& g = rho.grid();
  out << "# grid\n# lower";
  for (Eigen::Index a = 0; a < dim; ++a) out << ',' << format_double(g.box.lower(a));
  out << "\n# upper";
  for (Eigen::Index a = 0; a < dim; ++a) out << ',' << format_double(g.box.upper(a));
  out << "\n# resolution";
  for (int r : g.resolution) out << ',' << r;
  out << '\n';
  write_line(out, coordinate_header(dim, "value"));
  std::vector<std::string> cells(static_cast<std::size_t>(dim) + 1);
  for (Eigen::Index i = 0; i < g.cells(); ++i) {
    const PhaseSpacePoint c = g.cell_center(i);
    for (Eigen::Index a = 0; a < dim; ++a) cells[static_cast<std::size_t>(a)] = format_double(c(a));
    cells.back() = format_double(g.values(i));
    write_line(out, cells);
  }
}

classical::PhaseSpaceDensity read_density(std::istream& in, double bandwidth) {
  std::string line;
  std::vector<std::string> lower;
  std::vector<std::string> upper;
  std::vector<std::string> resolution;
  bool grid = false;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto cells = split(line.substr(2));
      if (cells.empty()) continue;
      if (cells[0] == "grid") grid = true;
      if (cells[0] == "lower") lower.assign(cells.begin() + 1, cells.end());
      if (cells[0] == "upper") upper.assign(cells.begin() + 1, cells.end());
      if (cells[0] == "resolution") resolution.assign(cells.begin() + 1, cells.end());
      continue;
    }
    header = split(line);
    break;
  }
  if (header.size() < 3 || (header.size() - 1) % 2 != 0) {
    fail(ErrorCode::Config, "density CSV header must list q..., p..., and a weight column");
  }
  const auto dim = static_cast<Eigen::Index>(header.size() - 1);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) fail(ErrorCode::Config, "ragged density CSV row");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c));
    rows.push_back(std::move(row));
  }

  if (!grid) {
    classical::SampleDensity s;
    s.bandwidth = bandwidth;
    s.points.resize(dim, static_cast<Eigen::Index>(rows.size()));
    s.weights.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      for (Eigen::Index a = 0; a < dim; ++a) s.points(a, col) = rows[i][static_cast<std::size_t>(a)];
      s.weights(col) = rows[i].back();
    }
    return classical::PhaseSpaceDensity(std::move(s));
  }

  if (static_cast<Eigen::Index>(lower.size()) != dim ||
      static_cast<Eigen::Index>(upper.size()) != dim ||
      static_cast<Eigen::Index>(resolution.size()) != dim) {
    fail(ErrorCode::Config, "grid CSV must declare lower, upper and resolution for every axis");
  }
  classical::GridDensity g;
  g.box.lower.resize(dim);
  g.box.upper.resize(dim);
  for (Eigen::Index a = 0; a < dim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    g.box.lower(a) = parse_double(lower[ua]);
    g.box.upper(a) = parse_double(upper[ua]);
    g.resolution.push_back(static_cast<int>(parse_double(resolution[ua])));
  }
  g.values.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    g.values(static_cast<Eigen::Index>(i)) = rows[i].back();
  }
  return classical::PhaseSpaceDensity(std::move(g));
}

void write_complex_matrix(std::ostream& out, const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j).real()) << ',' << format_double(m(i, j).imag());
    }
    out << '\n';
  }
}

ComplexMatrix read_complex_matrix(std::istream& in) {
  std::vector<std::vector<Complex>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (cells.size() % 2 != 0) {
      fail(ErrorCode::Config, "complex matrix rows need an even number of columns (re,im pairs)");
    }
    std::vector<Complex> row;
    for (std::size_t j = 0; j < cells.size(); j += 2) {
      row.emplace_back(parse_double(cells[j]), parse_double(cells[j + 1]));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(ErrorCode::Config, "ragged complex matrix");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::Config, "empty matrix file");
  ComplexMatrix m(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

ComplexMatrix read_complex_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "cannot open matrix file '" + path + "'");
  return read_complex_matrix(in);
}

}  // namespace timeless::csv
