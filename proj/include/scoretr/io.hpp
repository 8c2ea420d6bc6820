#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "scoretr/tensor.hpp"

namespace scoretr {

/// COO text format. First line `# dims I1 ... ID [time] [multi]`; each
/// following non-comment line is `i1 ... iD value [t]` with 0-based indices.
/// The `time` token declares the trailing timestamp column, `multi` marks a
/// multiset (repeated observations of the same entry allowed).
SparseTensor read_coo(const std::filesystem::path& path);
void write_coo(const std::filesystem::path& path, const SparseTensor& t);

/// Dense binary format: magic `STDT`, little-endian u32 order, D u64 dims,
/// then prod(dims) f64 values row-major.
DenseTensor read_dense(const std::filesystem::path& path);
void write_dense(const std::filesystem::path& path, const DenseTensor& t);

/// Split manifests: text lists of indices (plus timestamp column when the
/// originating tensor is timed). Lines are `i1 ... iD [t]`.
struct IndexList {
  std::size_t order = 0;
  bool with_time = false;
  std::vector<MultiIndex> indices;
  std::vector<double> times;
};

IndexList read_index_list(const std::filesystem::path& path);
void write_index_list(const std::filesystem::path& path, const IndexList& list);
IndexList index_list_of(const SparseTensor& t);

}  // namespace scoretr
