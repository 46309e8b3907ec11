#pragma once

#include <string>
#include <vector>

namespace mixedspec::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Polylines on shared axes, one colour per series.
std::string line_plot(const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, const std::vector<Series>& series);

/// Marks only (eigenvalue ladders, gap profiles, phase diagrams).
std::string scatter_plot(const std::string& title, const std::string& xlabel,
                         const std::string& ylabel,
                         const std::vector<Series>& series);

}  // namespace mixedspec::svg
