#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "scoretr/config.hpp"
#include "scoretr/run.hpp"

namespace {

struct CommonOpts {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::int64_t seed = -1;
  int workers = 0;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
  sub->add_option("--config", opts.config, "config file (JSON)");
  sub->add_option("--set", opts.sets, "override one config key, key=value")
      ->take_all();
  sub->add_option("--out", opts.out, "output directory");
  sub->add_option("--seed", opts.seed, "root seed");
  sub->add_option("--workers", opts.workers, "worker threads for samplers");
}

int execute(const std::string& task, const CommonOpts& opts) {
  try {
    scoretr::ExperimentConfig cfg;
    if (!opts.config.empty()) cfg = scoretr::ExperimentConfig::from_file(opts.config);
    cfg.set_task(task);
    for (const auto& kv : opts.sets) cfg.set_override(kv);
    if (!opts.out.empty()) cfg.doc["out"] = opts.out;
    if (opts.seed >= 0) cfg.doc["seed"] = static_cast<std::uint64_t>(opts.seed);
    if (opts.workers > 0) cfg.doc["workers"] = opts.workers;
    return scoretr::run(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"score-based tensor recovery"};
  app.set_version_flag("--version", scoretr::kVersion);
  app.require_subcommand(1);

  const char* verbs[] = {"generate", "train", "complete", "denoise", "eval", "plot"};
  const char* descs[] = {"synthesize simulation data, splits, and corruptions",
                         "fit the energy model on observations",
                         "train per rank and predict held-out entries",
                         "block-coordinate-descent denoising",
                         "metrics between prediction and reference tensors",
                         "per-entry density curve from a trained model"};
  std::vector<CommonOpts> opts(6);
  int rc = 0;
  for (int k = 0; k < 6; ++k) {
    CLI::App* sub = app.add_subcommand(verbs[k], descs[k]);
    add_common(sub, opts[static_cast<std::size_t>(k)]);
    sub->callback([k, &opts, &rc, &verbs] {
      rc = execute(verbs[k], opts[static_cast<std::size_t>(k)]);
    });
  }

  CLI11_PARSE(app, argc, argv);
  return rc;
}
