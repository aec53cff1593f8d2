#pragma once

#include <string>
#include <vector>

#include "solver.hpp"

namespace ucprop {

// %.17g: shortest fixed-width form that round-trips doubles.
std::string format_double(double v);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// One header line, stable column order, 17-significant-digit floats.
void write_csv(const Table& table, const std::string& path);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  std::size_t n = 0;
  bool valid = false;  // needs >= 2 points with nonconstant x
};

LinearFit linear_fit(const std::vector<double>& x,
                     const std::vector<double>& y);

// Deterministic SVG (no timestamps). The fit line, when given, is annotated
// with slope and R^2.
std::string svg_scatter(const std::vector<double>& x,
                        const std::vector<double>& y,
                        const std::string& title, const std::string& xlabel,
                        const std::string& ylabel,
                        const LinearFit* fit = nullptr);

std::string svg_histogram(const std::vector<double>& values, int bins,
                          const std::string& title, const std::string& xlabel);

void write_text(const std::string& path, const std::string& content);

// Field persistence: small text header then the node values as binary
// doubles, same layout family as the mask format.
void save_field(const SolutionField& u, const std::string& path);
SolutionField load_field(const std::string& path);

}  // namespace ucprop
