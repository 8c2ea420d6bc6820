#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "scoretr/energy.hpp"

namespace scoretr {

/// Normalized grid density from energies: d_g = exp(-E_g) / sum_h exp(-E_h)*dx.
struct DensityCurve {
  std::vector<double> x;
  std::vector<double> density;
  double dx = 0.0;
};

DensityCurve density_on_grid(const EntryEnergy& energy, double lo, double hi, int points);

/// CSV with header `x,density`.
void write_density_csv(const std::filesystem::path& path, const DensityCurve& curve);

/// Positions of local maxima at least `prominence_frac` of the global peak.
std::vector<std::size_t> local_maxima(std::span<const double> density,
                                      double prominence_frac = 0.05);

/// Line plot of the density with an optional empirical histogram overlay.
std::string density_svg(const DensityCurve& curve, std::span<const double> samples,
                        int bins = 30);

}  // namespace scoretr
