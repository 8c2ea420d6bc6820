#include "scoretr/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace scoretr {

using nlohmann::json;

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  ExperimentConfig cfg;
  try {
    in >> cfg.doc;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config " + path.string() + ": " + e.what());
  }
  if (!cfg.doc.is_object()) throw std::runtime_error("config root must be an object");
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  ExperimentConfig cfg;
  cfg.doc = json::parse(text);
  if (!cfg.doc.is_object()) throw std::runtime_error("config root must be an object");
  return cfg;
}

void ExperimentConfig::set_override(const std::string& key_equals_value) {
  auto eq = key_equals_value.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("--set wants key=value, got `" + key_equals_value + "`");
  std::string key = key_equals_value.substr(0, eq);
  std::string value = key_equals_value.substr(eq + 1);

  std::string pointer = "/";
  for (char c : key) pointer += (c == '.') ? '/' : c;

  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = value;  // plain string
  }
  doc[json::json_pointer(pointer)] = v;
}

void ExperimentConfig::set_task(const std::string& task) { doc["task"] = task; }

std::string ExperimentConfig::task() const {
  return doc.value("task", std::string{});
}

namespace {

bool has_path(const json& j, std::initializer_list<const char*> path) {
  const json* cur = &j;
  for (const char* key : path) {
    if (!cur->is_object() || !cur->contains(key)) return false;
    cur = &(*cur)[key];
  }
  return !cur->is_null();
}

void require(const json& j, std::initializer_list<const char*> path,
             const std::string& name, std::vector<std::string>& errors) {
  if (!has_path(j, path)) errors.push_back("missing required field: " + name);
}

void check_positive(const json& j, std::initializer_list<const char*> path,
                    const std::string& name, std::vector<std::string>& errors) {
  const json* cur = &j;
  for (const char* key : path) {
    if (!cur->is_object() || !cur->contains(key)) return;
    cur = &(*cur)[key];
  }
  if (!cur->is_number() || !(cur->get<double>() > 0.0))
    errors.push_back("field must be a positive number: " + name);
}

}  // namespace

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> errors;
  static const std::set<std::string> kTasks = {"generate", "train", "complete",
                                               "denoise", "eval", "plot"};
  std::string t = task();
  if (!kTasks.count(t)) {
    errors.push_back("task must be one of generate/train/complete/denoise/eval/plot");
    return errors;
  }

  if (t == "generate") {
    require(doc, {"generate", "kind"}, "generate.kind", errors);
    if (has_path(doc, {"generate", "kind"})) {
      std::string kind = doc["generate"]["kind"].get<std::string>();
      static const std::set<std::string> kKinds = {"sim-beta", "sim-mog", "sim-exp",
                                                   "sim-continuous", "lowrank",
                                                   "image-noise", "inpaint"};
      if (!kKinds.count(kind))
        errors.push_back("generate.kind must be one of sim-beta/sim-mog/sim-exp/"
                         "sim-continuous/lowrank/image-noise/inpaint");
      if (kind == "image-noise" || kind == "inpaint")
        require(doc, {"generate", "source"}, "generate.source", errors);
      if (kind.rfind("sim-", 0) == 0 || kind == "lowrank")
        require(doc, {"generate", "dims"}, "generate.dims", errors);
    }
  } else if (t == "train") {
    require(doc, {"data", "train"}, "data.train", errors);
  } else if (t == "complete") {
    require(doc, {"data", "train"}, "data.train", errors);
    require(doc, {"data", "test"}, "data.test", errors);
  } else if (t == "denoise") {
    require(doc, {"data", "observed"}, "data.observed", errors);
  } else if (t == "eval") {
    require(doc, {"data", "pred"}, "data.pred", errors);
    require(doc, {"data", "truth"}, "data.truth", errors);
  } else if (t == "plot") {
    require(doc, {"data", "train"}, "data.train", errors);
    require(doc, {"checkpoint"}, "checkpoint", errors);
    require(doc, {"plot", "entry"}, "plot.entry", errors);
  }

  if (has_path(doc, {"train", "epochs"})) {
    const json& e = doc["train"]["epochs"];
    if (!e.is_number() || e.get<double>() < 0.0)
      errors.push_back("field must be a non-negative number: train.epochs");
  }
  check_positive(doc, {"model", "rank"}, "model.rank", errors);
  check_positive(doc, {"train", "batch"}, "train.batch", errors);
  check_positive(doc, {"train", "lr"}, "train.lr", errors);
  check_positive(doc, {"train", "sigma_max"}, "train.sigma_max", errors);
  check_positive(doc, {"train", "sigma_min"}, "train.sigma_min", errors);
  check_positive(doc, {"train", "levels"}, "train.levels", errors);
  return errors;
}

}  // namespace scoretr
