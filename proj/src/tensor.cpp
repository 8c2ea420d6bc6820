#include "scoretr/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace scoretr {

std::size_t numel(std::span<const std::size_t> dims) {
  std::size_t n = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("tensor dims must be positive");
    n *= d;
  }
  return n;
}

std::size_t linear_index(std::span<const std::size_t> dims,
                         std::span<const std::uint32_t> idx) {
  if (!index_in_range(dims, idx))
    throw std::out_of_range("index " + index_to_string(idx) + " out of range");
  std::size_t lin = 0;
  for (std::size_t d = 0; d < dims.size(); ++d) lin = lin * dims[d] + idx[d];
  return lin;
}

MultiIndex unravel_index(std::span<const std::size_t> dims, std::size_t lin) {
  MultiIndex idx(dims.size());
  for (std::size_t d = dims.size(); d-- > 0;) {
    idx[d] = static_cast<std::uint32_t>(lin % dims[d]);
    lin /= dims[d];
  }
  return idx;
}

std::string index_to_string(std::span<const std::uint32_t> idx) {
  std::ostringstream os;
  os << "(";
  for (std::size_t d = 0; d < idx.size(); ++d) os << (d ? "," : "") << idx[d];
  os << ")";
  return os.str();
}

DenseTensor::DenseTensor(Dims dims)
    : dims_(std::move(dims)),
      values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(numel(dims_)))) {}

DenseTensor::DenseTensor(Dims dims, Eigen::VectorXd values) : dims_(std::move(dims)) {
  if (static_cast<std::size_t>(values.size()) != numel(dims_))
    throw std::invalid_argument("dense tensor value count does not match dims");
  values_ = std::move(values);
}

double DenseTensor::at(std::span<const std::uint32_t> idx) const {
  return values_[static_cast<Eigen::Index>(linear_index(dims_, idx))];
}

double& DenseTensor::at(std::span<const std::uint32_t> idx) {
  return values_[static_cast<Eigen::Index>(linear_index(dims_, idx))];
}

SparseTensor::SparseTensor(Dims dims, bool with_time, Dedup dedup)
    : dims_(std::move(dims)), with_time_(with_time), dedup_(dedup) {
  numel(dims_);  // validates positivity
  if (dedup_ == Dedup::Reject && !with_time_) seen_.assign(numel(dims_), false);
}

SparseTensor SparseTensor::from_dense(const DenseTensor& t) {
  SparseTensor out(t.dims(), false, Dedup::Allow);
  out.reserve(t.size());
  for (std::size_t lin = 0; lin < t.size(); ++lin) {
    MultiIndex idx = unravel_index(t.dims(), lin);
    out.idx_.insert(out.idx_.end(), idx.begin(), idx.end());
    out.values_.push_back(t[lin]);
  }
  return out;
}

void SparseTensor::reserve(std::size_t n) {
  idx_.reserve(n * order());
  values_.reserve(n);
  if (with_time_) times_.reserve(n);
  if (dedup_ == Dedup::Reject && with_time_) timed_seen_.reserve(n);
}

void SparseTensor::check_add(std::span<const std::uint32_t> idx, std::optional<double> t) {
  std::size_t lin = linear_index(dims_, idx);
  if (t && !(*t >= 0.0 && *t <= 1.0))
    throw std::invalid_argument("timestamp must lie in [0,1]");
  if (dedup_ == Dedup::Allow) return;
  if (!with_time_) {
    if (seen_[lin])
      throw std::invalid_argument("duplicate entry at " + index_to_string(idx));
    seen_[lin] = true;
  } else {
    if (timed_seen_dirty_) {
      std::sort(timed_seen_.begin(), timed_seen_.end());
      timed_seen_dirty_ = false;
    }
    auto key = std::make_pair(lin, *t);
    if (std::binary_search(timed_seen_.begin(), timed_seen_.end(), key))
      throw std::invalid_argument("duplicate entry at " + index_to_string(idx));
    timed_seen_.push_back(key);
    timed_seen_dirty_ = true;
  }
}

void SparseTensor::add(std::span<const std::uint32_t> idx, double value) {
  if (with_time_)
    throw std::invalid_argument("tensor carries timestamps; entry added without one");
  check_add(idx, std::nullopt);
  idx_.insert(idx_.end(), idx.begin(), idx.end());
  values_.push_back(value);
}

void SparseTensor::add(std::span<const std::uint32_t> idx, double value, double t) {
  if (!with_time_)
    throw std::invalid_argument("tensor carries no timestamps; entry added with one");
  check_add(idx, t);
  idx_.insert(idx_.end(), idx.begin(), idx.end());
  values_.push_back(value);
  times_.push_back(t);
}

FactorSet::FactorSet(const Dims& dims, int rank) : rank_(rank) {
  if (dims.empty()) throw std::invalid_argument("factor set needs at least one mode");
  if (rank <= 0) throw std::invalid_argument("rank must be positive");
  matrices_.reserve(dims.size());
  for (std::size_t d : dims)
    matrices_.emplace_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), rank));
}

Dims FactorSet::dims() const {
  Dims d(matrices_.size());
  for (std::size_t k = 0; k < matrices_.size(); ++k)
    d[k] = static_cast<std::size_t>(matrices_[k].rows());
  return d;
}

GatheredFactors::GatheredFactors(FactorSet& z, MultiIndex i) : z_(&z), i_(std::move(i)) {
  if (i_.size() != z.order())
    throw std::out_of_range("index order does not match factor set");
  for (std::size_t d = 0; d < i_.size(); ++d)
    if (i_[d] >= static_cast<std::uint32_t>(z.mode(d).rows()))
      throw std::out_of_range("index " + index_to_string(i_) + " out of range");
}

double& GatheredFactors::operator[](std::size_t k) {
  std::size_t r = static_cast<std::size_t>(z_->rank());
  return z_->mode(k / r)(i_[k / r], static_cast<Eigen::Index>(k % r));
}

double GatheredFactors::operator[](std::size_t k) const {
  std::size_t r = static_cast<std::size_t>(z_->rank());
  return z_->mode(k / r)(i_[k / r], static_cast<Eigen::Index>(k % r));
}

Eigen::VectorXd GatheredFactors::vec() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(size()));
  for (std::size_t k = 0; k < size(); ++k) v[static_cast<Eigen::Index>(k)] = (*this)[k];
  return v;
}

Eigen::VectorXd gather_factors(const FactorSet& z, std::span<const std::uint32_t> i) {
  if (i.size() != z.order())
    throw std::out_of_range("index order does not match factor set");
  Eigen::Index r = z.rank();
  Eigen::VectorXd out(static_cast<Eigen::Index>(z.order()) * r);
  for (std::size_t d = 0; d < z.order(); ++d) {
    if (i[d] >= static_cast<std::uint32_t>(z.mode(d).rows()))
      throw std::out_of_range("index " + index_to_string(i) + " out of range");
    out.segment(static_cast<Eigen::Index>(d) * r, r) = z.mode(d).row(i[d]).transpose();
  }
  return out;
}

GatheredFactors gather_factors_view(FactorSet& z, const MultiIndex& i) {
  return GatheredFactors(z, i);
}

DenseTensor fold(std::span<const std::pair<MultiIndex, double>> entries, const Dims& dims) {
  DenseTensor out(dims);
  std::vector<bool> seen(out.size(), false);
  for (const auto& [idx, value] : entries) {
    std::size_t lin = linear_index(dims, idx);
    if (seen[lin])
      throw std::invalid_argument("fold: duplicate index " + index_to_string(idx));
    seen[lin] = true;
    out[lin] = value;
  }
  return out;
}

DenseTensor fold(const SparseTensor& entries) {
  DenseTensor out(entries.dims());
  std::vector<bool> seen(out.size(), false);
  for (std::size_t e = 0; e < entries.size(); ++e) {
    std::size_t lin = linear_index(entries.dims(), entries.index(e));
    if (seen[lin])
      throw std::invalid_argument("fold: duplicate index " +
                                  index_to_string(entries.index(e)));
    seen[lin] = true;
    out[lin] = entries.value(e);
  }
  return out;
}

std::vector<std::pair<MultiIndex, double>> enumerate_entries(const DenseTensor& t) {
  std::vector<std::pair<MultiIndex, double>> out;
  out.reserve(t.size());
  for (std::size_t lin = 0; lin < t.size(); ++lin)
    out.emplace_back(unravel_index(t.dims(), lin), t[lin]);
  return out;
}

}  // namespace scoretr
