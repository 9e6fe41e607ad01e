#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "timeless/classical_liouville.hpp"
#include "timeless/linalg.hpp"

namespace timeless::csv {

/// Shortest round-trip decimal form.
std::string format_double(double x);

/// Minimal table writer: a header row, then rows of numbers or strings.
class Table {
 public:
  explicit Table(std::vector<std::string> header);

  Table& row(const std::vector<double>& values);
  Table& row(const std::vector<std::string>& values);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  void write(std::ostream& out) const;
  void save(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Samples: header `q1,...,qk,p1,...,pk,weight`, one row per sample.
/// Grids: `# grid`, `# lower,...`, `# upper,...`, `# resolution,...` then the
/// same column header with `value` in place of `weight`, one row per cell.
void write_density(std::ostream& out, const classical::PhaseSpaceDensity& rho);

/// Inverse of write_density. Sample files get `bandwidth` as their kernel
/// width (the CSV does not carry it).
classical::PhaseSpaceDensity read_density(std::istream& in, double bandwidth = 0.1);

/// Each line is one matrix row of alternating real and imaginary parts:
/// re(0),im(0),re(1),im(1),...
void write_complex_matrix(std::ostream& out, const ComplexMatrix& m);
ComplexMatrix read_complex_matrix(std::istream& in);
ComplexMatrix read_complex_matrix_file(const std::string& path);

}  // namespace timeless::csv
