#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace scoretr {

/// The L noise scales shared by training and annealed sampling, stored in
/// annealing order: sigma_max = sigmas[0] >= ... >= sigmas[L-1] = sigma_min.
class NoiseSchedule {
 public:
  NoiseSchedule() = default;

  explicit NoiseSchedule(std::vector<double> sigmas) : sigmas_(std::move(sigmas)) {
    if (sigmas_.empty()) throw std::invalid_argument("noise schedule must be non-empty");
    for (std::size_t l = 0; l < sigmas_.size(); ++l) {
      if (!(sigmas_[l] > 0.0) || !std::isfinite(sigmas_[l]))
        throw std::invalid_argument("noise scales must be positive and finite");
      if (l > 0 && !(sigmas_[l] < sigmas_[l - 1]))
        throw std::invalid_argument("noise scales must be strictly decreasing");
    }
  }

  std::size_t levels() const { return sigmas_.size(); }
  double sigma(std::size_t l) const { return sigmas_[l]; }
  double sigma_max() const { return sigmas_.front(); }
  double sigma_min() const { return sigmas_.back(); }
  std::span<const double> sigmas() const { return sigmas_; }

 private:
  std::vector<double> sigmas_;
};

/// Geometric schedule sigma_l = sigma_max * (sigma_min/sigma_max)^((l-1)/(L-1)),
/// endpoints stored exactly as given.
inline NoiseSchedule make_noise_schedule(double sigma_max, double sigma_min, int levels) {
  if (levels < 2) throw std::invalid_argument("noise schedule needs at least 2 levels");
  if (!(sigma_max > sigma_min) || !(sigma_min > 0.0))
    throw std::invalid_argument("noise schedule requires sigma_max > sigma_min > 0");
  std::vector<double> s(static_cast<std::size_t>(levels));
  s.front() = sigma_max;
  s.back() = sigma_min;
  double log_ratio = std::log(sigma_min / sigma_max);
  for (int l = 1; l + 1 < levels; ++l)
    s[static_cast<std::size_t>(l)] =
        sigma_max * std::exp(log_ratio * static_cast<double>(l) / static_cast<double>(levels - 1));
  return NoiseSchedule(std::move(s));
}

}  // namespace scoretr
