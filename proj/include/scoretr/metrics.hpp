#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <span>

#include "scoretr/tensor.hpp"

namespace scoretr {

struct MetricReport {
  std::optional<double> rmse, mae, psnr, ssim, nrmse;
  std::size_t count = 0;
};

double rmse(std::span<const double> pred, std::span<const double> truth);
double mae(std::span<const double> pred, std::span<const double> truth);

/// 10*log10(peak^2 / MSE); identical inputs give +inf.
double psnr(std::span<const double> pred, std::span<const double> truth, double peak = 1.0);

/// ||pred - truth||_F / ||truth||_F.
double nrmse(std::span<const double> pred, std::span<const double> truth);

/// Mean local SSIM with the 11x11 Gaussian window (sigma 1.5),
/// C1=(0.01*peak)^2, C2=(0.03*peak)^2; 3-way tensors are averaged over the
/// last mode. Slices must be at least 11x11.
double ssim(const DenseTensor& pred, const DenseTensor& truth, double peak = 1.0);

inline double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return rmse(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
              std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}
inline double mae(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return mae(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
             std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}
inline double psnr(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double peak = 1.0) {
  return psnr(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
              std::span<const double>(b.data(), static_cast<std::size_t>(b.size())), peak);
}
inline double nrmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return nrmse(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
               std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

}  // namespace scoretr
