#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace scoretr {

struct NamedTensor {
  std::string name;
  Eigen::MatrixXd* tensor;
};

/// Parameter checkpoint: `<prefix>.bin` holds one dense binary record per
/// tensor; `<prefix>.manifest` is a sidecar text file with one `name rows cols`
/// line per record, in file order.
void save_checkpoint(const std::filesystem::path& prefix,
                     std::span<const NamedTensor> tensors);

/// Loads into the given tensors; names and shapes must match the manifest.
void load_checkpoint(const std::filesystem::path& prefix,
                     std::span<const NamedTensor> tensors);

}  // namespace scoretr
