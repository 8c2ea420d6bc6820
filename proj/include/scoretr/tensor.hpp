#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace scoretr {

/// Per-mode coordinates (i_1, ..., i_D) of one tensor entry.
using MultiIndex = std::vector<std::uint32_t>;
using Dims = std::vector<std::size_t>;

std::size_t numel(std::span<const std::size_t> dims);

inline bool index_in_range(std::span<const std::size_t> dims,
                           std::span<const std::uint32_t> idx) {
  if (idx.size() != dims.size()) return false;
  for (std::size_t d = 0; d < dims.size(); ++d)
    if (idx[d] >= dims[d]) return false;
  return true;
}

/// Row-major linearization (last mode fastest).
std::size_t linear_index(std::span<const std::size_t> dims,
                         std::span<const std::uint32_t> idx);
MultiIndex unravel_index(std::span<const std::size_t> dims, std::size_t lin);

std::string index_to_string(std::span<const std::uint32_t> idx);

/// Dense D-way tensor, row-major values.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Dims dims);
  DenseTensor(Dims dims, Eigen::VectorXd values);

  const Dims& dims() const { return dims_; }
  std::size_t order() const { return dims_.size(); }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  double operator[](std::size_t lin) const { return values_[static_cast<Eigen::Index>(lin)]; }
  double& operator[](std::size_t lin) { return values_[static_cast<Eigen::Index>(lin)]; }
  double at(std::span<const std::uint32_t> idx) const;
  double& at(std::span<const std::uint32_t> idx);

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

 private:
  Dims dims_;
  Eigen::VectorXd values_;
};

/// Sparse observations over an index set, with optional per-entry timestamps
/// in [0, 1]. Entries are stored SoA: a flat n*D index array plus value and
/// timestamp arrays. By default duplicate (index, timestamp) records are
/// rejected; simulation data carrying repeated draws of the same entry is
/// constructed in Multiset mode.
class SparseTensor {
 public:
  enum class Dedup { Reject, Allow };

  SparseTensor() = default;
  SparseTensor(Dims dims, bool with_time, Dedup dedup = Dedup::Reject);

  /// Fully-observed view of a dense tensor (duplicate checks skipped; every
  /// position is listed exactly once by construction).
  static SparseTensor from_dense(const DenseTensor& t);

  void reserve(std::size_t n);
  void add(std::span<const std::uint32_t> idx, double value);
  void add(std::span<const std::uint32_t> idx, double value, double t);

  const Dims& dims() const { return dims_; }
  std::size_t order() const { return dims_.size(); }
  std::size_t size() const { return values_.size(); }
  bool has_time() const { return with_time_; }
  bool multiset() const { return dedup_ == Dedup::Allow; }

  std::span<const std::uint32_t> index(std::size_t e) const {
    return {idx_.data() + e * order(), order()};
  }
  MultiIndex index_vec(std::size_t e) const {
    auto s = index(e);
    return MultiIndex(s.begin(), s.end());
  }
  double value(std::size_t e) const { return values_[e]; }
  void set_value(std::size_t e, double v) { values_[e] = v; }
  double time(std::size_t e) const { return times_[e]; }
  std::optional<double> time_opt(std::size_t e) const {
    if (!with_time_) return std::nullopt;
    return times_[e];
  }

  std::span<const double> values() const { return values_; }
  std::span<const double> times() const { return times_; }

 private:
  void check_add(std::span<const std::uint32_t> idx, std::optional<double> t);

  Dims dims_;
  bool with_time_ = false;
  Dedup dedup_ = Dedup::Reject;
  std::vector<std::uint32_t> idx_;
  std::vector<double> values_;
  std::vector<double> times_;
  std::vector<bool> seen_;                                   // untimed dedup bitmap
  std::vector<std::pair<std::size_t, double>> timed_seen_;   // timed dedup, sorted on demand
  bool timed_seen_dirty_ = false;
};

/// Shared per-mode factor matrices Z^1..Z^D, each I_d x R.
class FactorSet {
 public:
  FactorSet() = default;
  FactorSet(const Dims& dims, int rank);

  std::size_t order() const { return matrices_.size(); }
  int rank() const { return rank_; }
  Dims dims() const;

  Eigen::MatrixXd& mode(std::size_t d) { return matrices_[d]; }
  const Eigen::MatrixXd& mode(std::size_t d) const { return matrices_[d]; }

 private:
  int rank_ = 0;
  std::vector<Eigen::MatrixXd> matrices_;
};

/// Write-through view of the factor rows selected by one multi-index;
/// coordinate k maps to (mode k/R, row i_{k/R}, column k%R).
class GatheredFactors {
 public:
  GatheredFactors(FactorSet& z, MultiIndex i);

  std::size_t size() const { return z_->order() * static_cast<std::size_t>(z_->rank()); }
  double& operator[](std::size_t k);
  double operator[](std::size_t k) const;
  Eigen::VectorXd vec() const;

 private:
  FactorSet* z_;
  MultiIndex i_;
};

/// Concatenated rows z^1_{i_1} .. z^D_{i_D}, length D*R.
Eigen::VectorXd gather_factors(const FactorSet& z, std::span<const std::uint32_t> i);
GatheredFactors gather_factors_view(FactorSet& z, const MultiIndex& i);

/// Dense tensor from listed entries; unlisted positions are 0. Duplicate
/// indices are an error.
DenseTensor fold(std::span<const std::pair<MultiIndex, double>> entries, const Dims& dims);
DenseTensor fold(const SparseTensor& entries);

std::vector<std::pair<MultiIndex, double>> enumerate_entries(const DenseTensor& t);

}  // namespace scoretr
