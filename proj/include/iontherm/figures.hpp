#pragma once

// Data behind figures 1-7 as CSV tables: numeric and closed-form series side
// by side on a shared grid.

#include <optional>
#include <string>
#include <vector>

#include "iontherm/run_config.hpp"

namespace iontherm::figures {

struct FigureOptions {
  std::vector<double> omegas;        // rad/s
  std::vector<double> temperatures;  // K
  std::vector<double> nbars;
  std::optional<double> g, delta, phi;
  std::optional<int> points;
};

struct FigureOutput {
  std::string suffix;  // "" for the main table, e.g. "_b" for a companion
  config::CsvTable table;
};

/// Throws std::invalid_argument for an unknown figure or bad overrides.
std::vector<FigureOutput> make_figure(int number, const FigureOptions& options);

/// Evenly spaced, both ends included.
std::vector<double> grid(double lo, double hi, int points);

}  // namespace iontherm::figures
