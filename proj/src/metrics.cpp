#include "scoretr/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace scoretr {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.empty()) throw std::invalid_argument("metric over empty input");
  if (a.size() != b.size()) throw std::invalid_argument("metric input length mismatch");
}

double mse(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double d = a[k] - b[k];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred, truth);
  return std::sqrt(mse(pred, truth));
}

double mae(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred, truth);
  double acc = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) acc += std::abs(pred[k] - truth[k]);
  return acc / static_cast<double>(pred.size());
}

double psnr(std::span<const double> pred, std::span<const double> truth, double peak) {
  check_lengths(pred, truth);
  double m = mse(pred, truth);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / m);
}

double nrmse(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred, truth);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    double d = pred[k] - truth[k];
    num += d * d;
    den += truth[k] * truth[k];
  }
  if (den == 0.0) throw std::invalid_argument("nrmse: zero-norm truth");
  return std::sqrt(num / den);
}

namespace {

constexpr int kWin = 11;

Eigen::Matrix<double, kWin, 1> gaussian_kernel() {
  Eigen::Matrix<double, kWin, 1> g;
  double sigma = 1.5;
  double sum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    double x = static_cast<double>(i - kWin / 2);
    g[i] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += g[i];
  }
  return g / sum;
}

/// Separable valid-mode Gaussian filtering: (H, W) -> (H-10, W-10).
Eigen::ArrayXXd gauss_valid(const Eigen::ArrayXXd& img) {
  static const Eigen::Matrix<double, kWin, 1> g = gaussian_kernel();
  Eigen::Index h = img.rows(), w = img.cols();
  Eigen::ArrayXXd rows(h - kWin + 1, w);
  for (Eigen::Index r = 0; r + kWin <= h; ++r) {
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(w);
    for (int k = 0; k < kWin; ++k) acc += g[k] * img.row(r + k).transpose();
    rows.row(r) = acc.transpose();
  }
  Eigen::ArrayXXd out(h - kWin + 1, w - kWin + 1);
  for (Eigen::Index c = 0; c + kWin <= w; ++c) {
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(h - kWin + 1);
    for (int k = 0; k < kWin; ++k) acc += g[k] * rows.col(c + k);
    out.col(c) = acc;
  }
  return out;
}

/// Band slice as (H, W) array from row-major values; 3-way layout is (H, W, B).
Eigen::ArrayXXd band_slice(const DenseTensor& t, std::size_t band, std::size_t bands) {
  std::size_t h = t.dims()[0], w = t.dims()[1];
  Eigen::ArrayXXd out(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(w));
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          t[(r * w + c) * bands + band];
  return out;
}

double ssim_2d(const Eigen::ArrayXXd& x, const Eigen::ArrayXXd& y, double peak) {
  if (x.rows() < kWin || x.cols() < kWin)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  double c1 = (0.01 * peak) * (0.01 * peak);
  double c2 = (0.03 * peak) * (0.03 * peak);
  Eigen::ArrayXXd mx = gauss_valid(x);
  Eigen::ArrayXXd my = gauss_valid(y);
  Eigen::ArrayXXd sxx = gauss_valid(x * x) - mx * mx;
  Eigen::ArrayXXd syy = gauss_valid(y * y) - my * my;
  Eigen::ArrayXXd sxy = gauss_valid(x * y) - mx * my;
  Eigen::ArrayXXd num = (2.0 * mx * my + c1) * (2.0 * sxy + c2);
  Eigen::ArrayXXd den = (mx * mx + my * my + c1) * (sxx + syy + c2);
  return (num / den).mean();
}

}  // namespace

double ssim(const DenseTensor& pred, const DenseTensor& truth, double peak) {
  if (pred.dims() != truth.dims()) throw std::invalid_argument("ssim: shape mismatch");
  if (pred.order() != 2 && pred.order() != 3)
    throw std::invalid_argument("ssim: expects a 2-way or 3-way tensor");
  std::size_t bands = pred.order() == 3 ? pred.dims()[2] : 1;
  double acc = 0.0;
  for (std::size_t b = 0; b < bands; ++b)
    acc += ssim_2d(band_slice(pred, b, bands), band_slice(truth, b, bands), peak);
  return acc / static_cast<double>(bands);
}

}  // namespace scoretr
