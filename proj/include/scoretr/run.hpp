#pragma once

#include <ostream>

#include "scoretr/config.hpp"

namespace scoretr {

/// Executes the configured task and writes its artifacts (manifest, metrics,
/// tensors, checkpoints) under the output directory. Returns a process exit
/// status: 0 on success, nonzero with diagnostics on the log stream.
int run(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace scoretr
