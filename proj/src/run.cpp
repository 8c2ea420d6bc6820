#include "scoretr/run.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "scoretr/datagen.hpp"
#include "scoretr/dsm.hpp"
#include "scoretr/io.hpp"
#include "scoretr/metrics.hpp"
#include "scoretr/plotting.hpp"
#include "scoretr/recovery.hpp"
#include "scoretr/rng.hpp"

namespace scoretr {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

template <class T>
T get_at(const json& j, std::initializer_list<const char*> path, T def) {
  const json* cur = &j;
  for (const char* key : path) {
    if (!cur->is_object() || !cur->contains(key)) return def;
    cur = &(*cur)[key];
  }
  if (cur->is_null()) return def;
  return cur->get<T>();
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_metrics_csv(const fs::path& path,
                       const std::vector<std::pair<std::string, double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "metric,value\n";
  for (const auto& [name, value] : rows) out << name << "," << fmt(value) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_loss_csv(const fs::path& path, const std::vector<double>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < trace.size(); ++e) out << e << "," << fmt(trace[e]) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct RunContext {
  const json& j;
  fs::path out;
  std::uint64_t seed;
  int workers;
  std::ostream& log;
};

void write_manifest(const RunContext& ctx) {
  json manifest;
  manifest["version"] = kVersion;
  manifest["seed"] = ctx.seed;
  manifest["config"] = ctx.j;
  std::ofstream out(ctx.out / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest");
  out << manifest.dump(2) << "\n";
}

// --- model/train assembly from config --------------------------------------

Variant parse_variant(const std::string& s) {
  if (s == "tabular") return Variant::Tabular;
  if (s == "temporal") return Variant::Temporal;
  if (s == "implicit") return Variant::Implicit;
  throw std::invalid_argument("model.variant must be tabular/temporal/implicit");
}

EnergyConfig model_config(const RunContext& ctx, const Dims& dims, int rank) {
  EnergyConfig mc;
  mc.variant = parse_variant(get_at<std::string>(ctx.j, {"model", "variant"}, "tabular"));
  mc.dims = dims;
  mc.rank = rank;
  mc.hidden = get_at<std::vector<int>>(ctx.j, {"model", "hidden"}, {64, 64});
  mc.embed = get_at<int>(ctx.j, {"model", "embed"}, 0);
  std::string fusion = get_at<std::string>(ctx.j, {"model", "fusion"}, "concat");
  if (fusion != "concat" && fusion != "sum")
    throw std::invalid_argument("model.fusion must be concat or sum");
  mc.fusion = fusion == "concat" ? Fusion::Concat : Fusion::Sum;
  mc.time_features = get_at<int>(ctx.j, {"model", "time_features"}, 16);
  mc.time_scale = get_at<double>(ctx.j, {"model", "time_scale"}, 10.0);
  mc.time_embed = get_at<int>(ctx.j, {"model", "time_embed"}, 0);
  mc.coord_features = get_at<int>(ctx.j, {"model", "coord_features"}, 0);
  mc.coord_scale = get_at<double>(ctx.j, {"model", "coord_scale"}, 10.0);
  mc.coord_trainable = get_at<bool>(ctx.j, {"model", "coord_trainable"}, false);
  mc.seed = derive_seed(ctx.seed, "model", static_cast<std::uint64_t>(rank));
  return mc;
}

NoiseSchedule schedule_from(const RunContext& ctx) {
  double smax = get_at<double>(ctx.j, {"train", "sigma_max"}, 0.2);
  double smin = get_at<double>(ctx.j, {"train", "sigma_min"}, 0.01);
  int levels = get_at<int>(ctx.j, {"train", "levels"}, 10);
  if (levels == 1) return NoiseSchedule({smax});
  return make_noise_schedule(smax, smin, levels);
}

TrainConfig train_config(const RunContext& ctx) {
  TrainConfig tc;
  tc.epochs = get_at<int>(ctx.j, {"train", "epochs"}, 100);
  tc.batch = get_at<int>(ctx.j, {"train", "batch"}, 256);
  tc.lr = get_at<double>(ctx.j, {"train", "lr"}, 1e-3);
  tc.schedule = schedule_from(ctx);
  tc.seed = derive_seed(ctx.seed, "train");
  std::string mode = get_at<std::string>(ctx.j, {"train", "level_mode"}, "all");
  if (mode != "all" && mode != "one")
    throw std::invalid_argument("train.level_mode must be all or one");
  tc.level_mode = mode == "all" ? LevelMode::AllLevels : LevelMode::OnePerSample;
  tc.lambda_smooth = get_at<double>(ctx.j, {"train", "lambda_smooth"}, 0.0);
  tc.sigma_s = get_at<double>(ctx.j, {"train", "sigma_s"}, 0.0);
  return tc;
}

SamplerConfig sampler_config(const RunContext& ctx) {
  SamplerConfig sc;
  std::string kind = get_at<std::string>(ctx.j, {"sampler", "kind"}, "langevin");
  if (kind != "langevin" && kind != "grid")
    throw std::invalid_argument("sampler.kind must be langevin or grid");
  sc.kind = kind == "grid" ? SamplerConfig::Kind::Grid : SamplerConfig::Kind::Langevin;
  sc.langevin.schedule = schedule_from(ctx);
  sc.langevin.eps = get_at<double>(ctx.j, {"sampler", "eps"}, 2e-5);
  sc.langevin.steps = get_at<int>(ctx.j, {"sampler", "steps"}, 100);
  sc.langevin.final_denoise = get_at<bool>(ctx.j, {"sampler", "final_denoise"}, false);
  sc.langevin.seed = derive_seed(ctx.seed, "sampler");
  sc.grid.lo = get_at<double>(ctx.j, {"sampler", "grid_lo"}, 0.0);
  sc.grid.hi = get_at<double>(ctx.j, {"sampler", "grid_hi"}, 1.0);
  sc.grid.points = get_at<int>(ctx.j, {"sampler", "grid_points"}, 256);
  sc.workers = ctx.workers;
  return sc;
}

// --- tasks ------------------------------------------------------------------

void run_generate(const RunContext& ctx) {
  std::string kind = ctx.j["generate"]["kind"].get<std::string>();
  const json& g = ctx.j["generate"];
  std::uint64_t seed = derive_seed(ctx.seed, "generate");

  auto missing_spec = [&]() {
    MissingSpec ms;
    std::string mode = get_at<std::string>(ctx.j, {"generate", "missing", "mode"}, "random");
    ms.mode = mode == "burst" ? MissingSpec::Mode::Burst : MissingSpec::Mode::Random;
    ms.rate = get_at<double>(ctx.j, {"generate", "missing", "rate"}, 0.1);
    ms.bursts = get_at<int>(ctx.j, {"generate", "missing", "bursts"}, 4);
    ms.burst_frac = get_at<double>(ctx.j, {"generate", "missing", "burst_frac"}, 0.05);
    ms.seed = derive_seed(seed, "missing");
    return ms;
  };
  bool split = g.contains("missing");

  auto emit_split = [&](const SparseTensor& data) {
    if (split) {
      auto [train, test] = apply_missing(data, missing_spec());
      write_coo(ctx.out / "train.coo", train);
      write_coo(ctx.out / "test.coo", test);
      write_index_list(ctx.out / "test_mask.txt", index_list_of(test));
      ctx.log << "generated " << train.size() << " train / " << test.size()
              << " test observations\n";
    } else {
      write_coo(ctx.out / "train.coo", data);
      ctx.log << "generated " << data.size() << " observations\n";
    }
  };

  if (kind == "sim-beta" || kind == "sim-mog" || kind == "sim-exp") {
    SimSpec spec;
    spec.dims = get_at<Dims>(ctx.j, {"generate", "dims"}, {8, 8});
    spec.rank = get_at<int>(ctx.j, {"generate", "rank"}, 5);
    spec.samples = get_at<int>(ctx.j, {"generate", "samples"}, 200);
    spec.seed = derive_seed(seed, "samples");
    spec.law = kind == "sim-beta" ? SimLaw::Beta
                                  : (kind == "sim-mog" ? SimLaw::MoG : SimLaw::Exponential);
    FactorSet z = gen_factors(spec.dims, spec.rank, FactorLaw::uniform01(),
                              derive_seed(seed, "factors"));
    Eigen::MatrixXd m = z.mode(0) * z.mode(1).transpose();
    DenseTensor mt(spec.dims);
    for (std::size_t r = 0; r < spec.dims[0]; ++r)
      for (std::size_t c = 0; c < spec.dims[1]; ++c)
        mt[r * spec.dims[1] + c] = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    write_dense(ctx.out / "mean_matrix.stdt", mt);
    emit_split(gen_entry_samples(z, spec));
  } else if (kind == "sim-continuous") {
    Dims dims = get_at<Dims>(ctx.j, {"generate", "dims"}, {8, 8});
    int timestamps = get_at<int>(ctx.j, {"generate", "timestamps"}, 200);
    std::vector<FactorLaw> laws = {
        FactorLaw::gaussian((Eigen::VectorXd(2) << 0.0, 2.0).finished(), 2.0),
        FactorLaw::gaussian((Eigen::VectorXd(2) << 1.0, 1.0).finished(), 2.0)};
    FactorSet z = gen_factors(dims, 2, laws, derive_seed(seed, "factors"));
    emit_split(gen_continuous(z, timestamps, derive_seed(seed, "samples")));
  } else if (kind == "lowrank") {
    Dims dims = get_at<Dims>(ctx.j, {"generate", "dims"}, {16, 16, 8});
    int rank = get_at<int>(ctx.j, {"generate", "rank"}, 3);
    DenseTensor truth = gen_lowrank(dims, rank, derive_seed(seed, "lowrank"));
    write_dense(ctx.out / "truth.stdt", truth);
    if (g.contains("noise_case")) {
      auto spec = NoiseCaseSpec::for_case(g["noise_case"].get<int>());
      write_dense(ctx.out / "observed.stdt", corrupt(truth, spec, derive_seed(seed, "noise")));
    }
    ctx.log << "generated low-rank tensor with " << truth.size() << " entries\n";
  } else if (kind == "image-noise") {
    DenseTensor image = read_dense(g["source"].get<std::string>());
    auto spec = NoiseCaseSpec::for_case(get_at<int>(ctx.j, {"generate", "noise_case"}, 1));
    write_dense(ctx.out / "observed.stdt", corrupt(image, spec, derive_seed(seed, "noise")));
    ctx.log << "corrupted image written\n";
  } else if (kind == "inpaint") {
    DenseTensor image = read_dense(g["source"].get<std::string>());
    SparseTensor full = SparseTensor::from_dense(image);
    auto [train, test] = apply_missing(full, missing_spec());
    write_coo(ctx.out / "train.coo", train);
    write_index_list(ctx.out / "test_mask.txt", index_list_of(test));
    write_dense(ctx.out / "truth.stdt", image);
    ctx.log << "kept " << train.size() << " of " << full.size() << " pixels\n";
  } else {
    throw std::invalid_argument("unknown generate.kind " + kind);
  }
}

void run_train(const RunContext& ctx) {
  SparseTensor data = read_coo(ctx.j["data"]["train"].get<std::string>());
  int rank = get_at<int>(ctx.j, {"model", "rank"}, 5);
  EnergyModel model(model_config(ctx, data.dims(), rank));
  TrainResult tr = train(model, data, train_config(ctx));
  write_loss_csv(ctx.out / "loss.csv", tr.epoch_loss);
  model.save(ctx.out / "model");
  ctx.log << "trained " << tr.epoch_loss.size() << " epochs; final loss "
          << (tr.epoch_loss.empty() ? 0.0 : tr.epoch_loss.back()) << "\n";
}

void run_complete(const RunContext& ctx) {
  SparseTensor data = read_coo(ctx.j["data"]["train"].get<std::string>());
  SparseTensor test = read_coo(ctx.j["data"]["test"].get<std::string>());
  if (test.dims() != data.dims())
    throw std::invalid_argument("train/test tensors disagree on dims");

  std::vector<int> ranks;
  if (ctx.j.contains("model") && ctx.j["model"].contains("ranks"))
    ranks = ctx.j["model"]["ranks"].get<std::vector<int>>();
  else
    ranks = {get_at<int>(ctx.j, {"model", "rank"}, 5)};

  std::vector<Query> queries(test.size());
  for (std::size_t e = 0; e < test.size(); ++e)
    queries[e] = Query{test.index_vec(e), test.time_opt(e)};
  std::vector<double> truth(test.values().begin(), test.values().end());
  double init_value = observed_mode(data);
  std::vector<double> init(queries.size(), init_value);

  SamplerConfig sc = sampler_config(ctx);
  TrainConfig tc = train_config(ctx);
  bool from_checkpoint = ctx.j.contains("checkpoint");

  std::vector<std::pair<std::string, double>> rows;
  for (int rank : ranks) {
    EnergyModel model(model_config(ctx, data.dims(), rank));
    if (from_checkpoint) {
      model.load(ctx.j["checkpoint"].get<std::string>());
    } else {
      TrainResult tr = train(model, data, tc);
      write_loss_csv(ctx.out / ("loss_r" + std::to_string(rank) + ".csv"), tr.epoch_loss);
    }
    CompletionResult res = complete(model, queries, sc, init);
    if (!res.failed.empty())
      ctx.log << "warning: " << res.failed.size() << " completions failed (rank " << rank
              << ")\n";

    SparseTensor pred(test.dims(), test.has_time(), SparseTensor::Dedup::Allow);
    pred.reserve(queries.size());
    std::vector<double> ok_pred, ok_truth;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      if (test.has_time())
        pred.add(queries[q].idx, res.values[q], *queries[q].t);
      else
        pred.add(queries[q].idx, res.values[q]);
      if (std::isfinite(res.values[q])) {
        ok_pred.push_back(res.values[q]);
        ok_truth.push_back(truth[q]);
      }
    }
    write_coo(ctx.out / ("pred_r" + std::to_string(rank) + ".coo"), pred);
    model.save(ctx.out / ("model_r" + std::to_string(rank)));
    if (ok_pred.empty()) throw std::runtime_error("every completion failed");
    double r = rmse(ok_pred, ok_truth), m = mae(ok_pred, ok_truth);
    rows.emplace_back("rmse_r" + std::to_string(rank), r);
    rows.emplace_back("mae_r" + std::to_string(rank), m);
    ctx.log << "rank " << rank << ": rmse " << fmt(r) << " mae " << fmt(m) << "\n";
  }
  write_metrics_csv(ctx.out / "metrics.csv", rows);
}

SparseTensor load_observations(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".coo") return read_coo(path);
  return SparseTensor::from_dense(read_dense(path));
}

void run_denoise(const RunContext& ctx) {
  SparseTensor observed = load_observations(ctx.j["data"]["observed"].get<std::string>());
  DenseTensor truth;
  bool have_truth = ctx.j.contains("data") && ctx.j["data"].contains("truth");
  if (have_truth) truth = read_dense(ctx.j["data"]["truth"].get<std::string>());

  int rank = get_at<int>(ctx.j, {"model", "rank"}, 5);
  EnergyModel model(model_config(ctx, observed.dims(), rank));

  TrainConfig warmup = train_config(ctx);
  warmup.epochs = get_at<int>(ctx.j, {"denoise", "warmup_epochs"}, warmup.epochs);
  TrainResult tr = train(model, observed, warmup);
  write_loss_csv(ctx.out / "loss.csv", tr.epoch_loss);

  BcdConfig bc;
  bc.iterations = get_at<int>(ctx.j, {"denoise", "iterations"}, 5);
  bc.lambda_s = get_at<double>(ctx.j, {"denoise", "lambda_s"}, 0.1);
  bc.inner_train = train_config(ctx);
  bc.inner_train.epochs = get_at<int>(ctx.j, {"denoise", "epochs_per_iter"}, 30);
  bc.inner_train.seed = derive_seed(ctx.seed, "bcd");
  bc.sampler = sampler_config(ctx);

  BcdResult res = denoise_bcd(observed, model, bc, have_truth ? &truth : nullptr);
  if (res.aborted) ctx.log << "bcd aborted: " << res.abort_reason << "\n";

  write_dense(ctx.out / "clean.stdt", res.clean);
  write_dense(ctx.out / "sparse.stdt", res.sparse);
  model.save(ctx.out / "model");
  {
    std::ofstream out(ctx.out / "iterations.csv");
    out << "iter,train_loss,mean_abs_s,psnr\n";
    for (const auto& it : res.iters)
      out << it.iter << "," << fmt(it.train_loss) << "," << fmt(it.mean_abs_s) << ","
          << fmt(it.psnr) << "\n";
  }
  std::vector<std::pair<std::string, double>> rows;
  if (have_truth) {
    rows.emplace_back("rmse", rmse(res.clean.values(), truth.values()));
    rows.emplace_back("psnr", psnr(res.clean.values(), truth.values(), 1.0));
    rows.emplace_back("nrmse", nrmse(res.clean.values(), truth.values()));
    if (truth.order() == 2 || truth.order() == 3)
      rows.emplace_back("ssim", ssim(res.clean, truth, 1.0));
    write_metrics_csv(ctx.out / "metrics.csv", rows);
  }
  ctx.log << "denoised " << observed.size() << " entries over " << res.iters.size()
          << " iterations\n";
}

void run_eval(const RunContext& ctx) {
  DenseTensor pred = read_dense(ctx.j["data"]["pred"].get<std::string>());
  DenseTensor truth = read_dense(ctx.j["data"]["truth"].get<std::string>());
  if (pred.dims() != truth.dims()) throw std::invalid_argument("eval: shape mismatch");

  std::vector<std::pair<std::string, double>> rows;
  if (ctx.j["data"].contains("mask")) {
    IndexList mask = read_index_list(ctx.j["data"]["mask"].get<std::string>());
    std::vector<double> p, t;
    p.reserve(mask.indices.size());
    t.reserve(mask.indices.size());
    for (const auto& idx : mask.indices) {
      p.push_back(pred.at(idx));
      t.push_back(truth.at(idx));
    }
    rows.emplace_back("rmse", rmse(p, t));
    rows.emplace_back("mae", mae(p, t));
    rows.emplace_back("psnr", psnr(p, t, 1.0));
    rows.emplace_back("nrmse", nrmse(p, t));
  } else {
    rows.emplace_back("rmse", rmse(pred.values(), truth.values()));
    rows.emplace_back("mae", mae(pred.values(), truth.values()));
    rows.emplace_back("psnr", psnr(pred.values(), truth.values(), 1.0));
    rows.emplace_back("nrmse", nrmse(pred.values(), truth.values()));
    if (pred.order() == 2 || pred.order() == 3)
      rows.emplace_back("ssim", ssim(pred, truth, 1.0));
  }
  write_metrics_csv(ctx.out / "metrics.csv", rows);
  for (const auto& [name, value] : rows) ctx.log << name << " " << fmt(value) << "\n";
}

void run_plot(const RunContext& ctx) {
  SparseTensor data = read_coo(ctx.j["data"]["train"].get<std::string>());
  int rank = get_at<int>(ctx.j, {"model", "rank"}, 5);
  EnergyModel model(model_config(ctx, data.dims(), rank));
  model.load(ctx.j["checkpoint"].get<std::string>());

  MultiIndex entry;
  for (auto& v : ctx.j["plot"]["entry"]) entry.push_back(v.get<std::uint32_t>());
  std::optional<double> t;
  if (ctx.j["plot"].contains("time") && !ctx.j["plot"]["time"].is_null())
    t = ctx.j["plot"]["time"].get<double>();

  // histogram samples: observations at this entry
  std::vector<double> samples;
  for (std::size_t e = 0; e < data.size(); ++e) {
    auto idx = data.index(e);
    if (std::equal(idx.begin(), idx.end(), entry.begin(), entry.end()))
      samples.push_back(data.value(e));
  }

  double lo = get_at<double>(ctx.j, {"plot", "lo"}, 0.0);
  double hi = get_at<double>(ctx.j, {"plot", "hi"}, 1.0);
  int points = get_at<int>(ctx.j, {"plot", "points"}, 201);
  auto energy = model.entry_evaluator(entry, t);
  DensityCurve curve = density_on_grid(*energy, lo, hi, points);
  write_density_csv(ctx.out / "density.csv", curve);
  std::ofstream svg(ctx.out / "density.svg");
  svg << density_svg(curve, samples, get_at<int>(ctx.j, {"plot", "bins"}, 30));
  ctx.log << "density over [" << lo << "," << hi << "] with " << samples.size()
          << " empirical samples\n";
}

}  // namespace

int run(const ExperimentConfig& cfg, std::ostream& log) {
  auto errors = cfg.validate();
  if (!errors.empty()) {
    for (const auto& e : errors) log << "config error: " << e << "\n";
    return 2;
  }
  RunContext ctx{cfg.doc, fs::path(get_at<std::string>(cfg.doc, {"out"}, "out")),
                 get_at<std::uint64_t>(cfg.doc, {"seed"}, 0),
                 get_at<int>(cfg.doc, {"workers"}, 1), log};
  try {
    fs::create_directories(ctx.out);
    write_manifest(ctx);
    std::string task = cfg.task();
    if (task == "generate") run_generate(ctx);
    else if (task == "train") run_train(ctx);
    else if (task == "complete") run_complete(ctx);
    else if (task == "denoise") run_denoise(ctx);
    else if (task == "eval") run_eval(ctx);
    else if (task == "plot") run_plot(ctx);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace scoretr
