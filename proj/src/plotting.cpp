#include "scoretr/plotting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scoretr {

DensityCurve density_on_grid(const EntryEnergy& energy, double lo, double hi, int points) {
  if (!(lo < hi) || points < 2) throw std::invalid_argument("density grid is degenerate");
  DensityCurve curve;
  curve.dx = (hi - lo) / static_cast<double>(points - 1);
  curve.x.resize(static_cast<std::size_t>(points));
  curve.density.resize(static_cast<std::size_t>(points));
  std::vector<double> e(static_cast<std::size_t>(points));
  double emin = std::numeric_limits<double>::infinity();
  for (int g = 0; g < points; ++g) {
    double x = lo + static_cast<double>(g) * curve.dx;
    curve.x[static_cast<std::size_t>(g)] = x;
    e[static_cast<std::size_t>(g)] = energy.energy(x);
    emin = std::min(emin, e[static_cast<std::size_t>(g)]);
  }
  if (!std::isfinite(emin)) throw std::runtime_error("density: non-finite energies");
  double z = 0.0;
  for (int g = 0; g < points; ++g) {
    double p = std::exp(-(e[static_cast<std::size_t>(g)] - emin));
    curve.density[static_cast<std::size_t>(g)] = p;
    z += p * curve.dx;
  }
  for (double& d : curve.density) d /= z;
  return curve;
}

void write_density_csv(const std::filesystem::path& path, const DensityCurve& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "x,density\n";
  for (std::size_t g = 0; g < curve.x.size(); ++g)
    out << curve.x[g] << "," << curve.density[g] << "\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::size_t> local_maxima(std::span<const double> density,
                                      double prominence_frac) {
  std::vector<std::size_t> modes;
  if (density.size() < 3) return modes;
  double peak = *std::max_element(density.begin(), density.end());
  double floor = prominence_frac * peak;
  for (std::size_t g = 1; g + 1 < density.size(); ++g)
    if (density[g] > density[g - 1] && density[g] >= density[g + 1] && density[g] >= floor)
      modes.push_back(g);
  return modes;
}

namespace {

struct Frame {
  static constexpr double kW = 640, kH = 400;
  static constexpr double kL = 60, kR = 20, kT = 20, kB = 40;
  double xlo, xhi, ylo, yhi;

  double px(double x) const { return kL + (x - xlo) / (xhi - xlo) * (kW - kL - kR); }
  double py(double y) const { return kH - kB - (y - ylo) / (yhi - ylo) * (kH - kT - kB); }
};

}  // namespace

std::string density_svg(const DensityCurve& curve, std::span<const double> samples,
                        int bins) {
  if (curve.x.empty()) throw std::invalid_argument("density curve is empty");
  double xlo = curve.x.front(), xhi = curve.x.back();

  std::vector<double> hist;
  double hw = 0.0;
  if (!samples.empty() && bins > 0) {
    hist.assign(static_cast<std::size_t>(bins), 0.0);
    hw = (xhi - xlo) / bins;
    std::size_t inside = 0;
    for (double v : samples) {
      if (v < xlo || v > xhi) continue;
      int b = std::min(bins - 1, static_cast<int>((v - xlo) / hw));
      ++hist[static_cast<std::size_t>(b)];
      ++inside;
    }
    if (inside > 0)
      for (double& c : hist) c /= static_cast<double>(inside) * hw;  // density scale
  }

  double ymax = *std::max_element(curve.density.begin(), curve.density.end());
  for (double hv : hist) ymax = std::max(ymax, hv);
  Frame f{xlo, xhi, 0.0, ymax * 1.05 + 1e-12};

  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << Frame::kW << "' height='"
      << Frame::kH << "' viewBox='0 0 " << Frame::kW << " " << Frame::kH << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";

  for (std::size_t b = 0; b < hist.size(); ++b) {
    double x0 = xlo + static_cast<double>(b) * hw;
    double y = hist[b];
    if (y <= 0.0) continue;
    svg << "<rect x='" << f.px(x0) << "' y='" << f.py(y) << "' width='"
        << (f.px(x0 + hw) - f.px(x0)) << "' height='" << (f.py(0) - f.py(y))
        << "' fill='#9ecae1' stroke='none'/>\n";
  }

  svg << "<polyline fill='none' stroke='#d62728' stroke-width='2' points='";
  for (std::size_t g = 0; g < curve.x.size(); ++g)
    svg << f.px(curve.x[g]) << "," << f.py(curve.density[g]) << " ";
  svg << "'/>\n";

  // axes
  svg << "<line x1='" << Frame::kL << "' y1='" << f.py(0) << "' x2='" << Frame::kW - Frame::kR
      << "' y2='" << f.py(0) << "' stroke='black'/>\n";
  svg << "<line x1='" << Frame::kL << "' y1='" << Frame::kT << "' x2='" << Frame::kL
      << "' y2='" << f.py(0) << "' stroke='black'/>\n";
  svg << "<text x='" << Frame::kL << "' y='" << Frame::kH - 10 << "' font-size='12'>"
      << xlo << "</text>\n";
  svg << "<text x='" << Frame::kW - Frame::kR - 30 << "' y='" << Frame::kH - 10
      << "' font-size='12'>" << xhi << "</text>\n";
  svg << "<text x='5' y='" << Frame::kT + 10 << "' font-size='12'>" << ymax << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace scoretr
