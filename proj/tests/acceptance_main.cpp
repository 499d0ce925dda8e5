// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criteria 8 and 10 drive the CLI binary end to end.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hierfed/experiment.hpp"
#include "hierfed/federation.hpp"
#include "hierfed/metrics.hpp"
#include "hierfed/model.hpp"
#include "hierfed/rng.hpp"
#include "oracles.hpp"

using namespace hierfed;
namespace fs = std::filesystem;

namespace {

struct Checker {
  bool ok = true;
  std::string detail;

  void expect(bool condition, const std::string& message) {
    if (!condition && ok) {
      ok = false;
      detail = message;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<missing " + path.string() + ">";
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(HIERFED_TOOL_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -2;
}

// ---- criterion bodies ----------------------------------------------------

void criterion_gradient(Checker& c) {
  const auto start = std::chrono::steady_clock::now();
  SplitMix64 rng(20250810);
  for (int rep = 0; rep < 100; ++rep) {
    const ModelSpec spec = oracle::random_spec(rng);
    const ParamVector p = oracle::random_params(spec, rng);
    const Dataset ds = oracle::random_dataset(spec.input_dim, 1 + rng.bounded(40), rng);
    const ParamVector g = gradient(p, ds);
    const std::vector<double> fd = oracle::fd_gradient(p, ds);
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const double err = oracle::rel_err(g.values[i], fd[i]);
      c.expect(err <= 1e-5, "triple " + std::to_string(rep) + " component " +
                                std::to_string(i) + " rel err " + std::to_string(err));
      if (!c.ok) return;
    }
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 10.0, "took " + std::to_string(elapsed) + " s (budget 10 s)");
}

void criterion_aggregation(Checker& c) {
  const ModelSpec spec{ModelKind::Linear, 1, {}, Activation::Tanh};
  auto pv = [&](double a, double b) { return ParamVector{spec, {a, b}}; };

  // identity
  const ParamVector single = pv(4.5, -1.25);
  c.expect(weighted_average({single}, {9}).values == single.values,
           "single-model identity is not exact");

  // hand value
  const ParamVector m = weighted_average({pv(1, 2), pv(3, 4)}, {1, 3});
  c.expect(std::fabs(m.values[0] - 2.5) <= 1e-12 && std::fabs(m.values[1] - 3.5) <= 1e-12,
           "hand value (2.5, 3.5) missed");

  SplitMix64 rng(777);
  for (int rep = 0; rep < 40 && c.ok; ++rep) {
    const std::size_t count = 2 + rng.bounded(6);
    std::vector<ParamVector> models;
    std::vector<std::size_t> sizes;
    for (std::size_t i = 0; i < count; ++i) {
      models.push_back(pv(rng.uniform(-10, 10), rng.uniform(-10, 10)));
      sizes.push_back(1 + rng.bounded(100));
    }

    // convex envelope
    const ParamVector avg = weighted_average(models, sizes);
    for (std::size_t comp = 0; comp < 2; ++comp) {
      double lo = models[0].values[comp], hi = lo;
      for (const auto& model : models) {
        lo = std::min(lo, model.values[comp]);
        hi = std::max(hi, model.values[comp]);
      }
      const double slack = 1e-12 * std::max({1.0, std::fabs(lo), std::fabs(hi)});
      c.expect(avg.values[comp] >= lo - slack && avg.values[comp] <= hi + slack,
               "convex envelope violated");
    }

    // identical-model fixed point
    std::vector<ParamVector> idents(count, models[0]);
    const ParamVector fixed = weighted_average(idents, sizes);
    for (std::size_t comp = 0; comp < 2; ++comp) {
      const double scale = std::max(1.0, std::fabs(models[0].values[comp]));
      c.expect(std::fabs(fixed.values[comp] - models[0].values[comp]) <= 1e-12 * scale,
               "identical-model fixed point off by more than 1e-12");
    }

    // weight-scale invariance, bit-equal
    std::vector<std::size_t> scaled;
    for (std::size_t s : sizes) scaled.push_back(s * 7);
    c.expect(weighted_average(models, scaled).values == avg.values,
             "weight scaling changed the bits");
  }

  // permutation bit-stability via the keyed aggregations
  const auto data = [] {
    std::map<int, Dataset> out;
    SplitMix64 r(11);
    for (int f = 0; f < 5; ++f) {
      Dataset ds = oracle::random_dataset(2, 20 + r.bounded(20), r);
      ds.farm_id = f;
      out.emplace(f, std::move(ds));
    }
    return out;
  }();
  const ModelSpec spec2{ModelKind::Linear, 2, {}, Activation::Tanh};
  const TrainConfig cfg{0.03, 2};
  const Cluster in_order{0, {0, 1, 2, 3, 4}, init_params(spec2, 0), 3};
  const Cluster permuted{0, {4, 2, 0, 3, 1}, init_params(spec2, 0), 3};
  c.expect(run_cluster_rounds(in_order, data, cfg).cluster.model.values ==
               run_cluster_rounds(permuted, data, cfg).cluster.model.values,
           "member permutation changed the aggregation bits");
}

void criterion_fedavg_reduction(Checker& c) {
  for (std::uint64_t seed = 1; seed <= 10 && c.ok; ++seed) {
    ExperimentConfig cfg;
    cfg.num_farms = 5;
    cfg.num_crops = 1;
    cfg.dim = 3;
    cfg.local_epochs = 3;
    cfg.rounds = {5};
    cfg.eta = 0.04;
    cfg.noise_std = 0.2;
    cfg.n_train = 30;
    cfg.n_test = 5;
    cfg.feature_low.assign(3, -1.0);
    cfg.feature_high.assign(3, 1.0);
    cfg.seed = seed;
    const ExperimentArtifacts art = run_pipeline(cfg);

    const TrainConfig train{cfg.eta, cfg.local_epochs, BatchMode::FullBatch};
    const ParamVector direct = oracle::flat_fedavg(
        init_params(art.season.global_model.spec, seed), art.train_sets, train, 5);
    c.expect(art.season.global_model.values == direct.values,
             "seed " + std::to_string(seed) + ": K=1 season != flat FedAvg oracle");
  }
}

void criterion_single_member(Checker& c) {
  SplitMix64 rng(314);
  const ModelSpec spec{ModelKind::Linear, 4, {}, Activation::Tanh};
  const Dataset ds = oracle::random_dataset(4, 45, rng);
  const TrainConfig cfg{0.02, 10};
  const int rounds = 15;
  const Cluster cluster{0, {0}, init_params(spec, 1), rounds};
  const auto run = run_cluster_rounds(cluster, {{0, ds}}, cfg);
  const ParamVector direct = oracle::plain_gd(init_params(spec, 1), ds, cfg.learning_rate,
                                              static_cast<long long>(rounds) * cfg.epochs);
  c.expect(run.cluster.model.values == direct.values,
           "1-member cluster != plain GD over T_k*E epochs");
}

void criterion_descent(Checker& c) {
  ExperimentConfig cfg;  // reference defaults: N=10, K=6, E=10, T_k=15
  cfg.noise_std = 0.0;
  cfg.nonlinearity_scale = 0.0;
  cfg.farm_offset_std = 0.0;
  cfg.seed = 3;

  // eta below the tightest per-farm curvature bound
  ExperimentConfig probe = cfg;
  const ExperimentArtifacts data_only = [&] {
    ExperimentConfig tiny = probe;
    tiny.rounds.assign(tiny.num_crops, 1);
    tiny.local_epochs = 1;
    return run_pipeline(tiny);
  }();
  double max_curvature = 0.0;
  for (const auto& [farm, ds] : data_only.train_sets)
    max_curvature = std::max(max_curvature, oracle::linear_curvature_bound(ds));
  c.expect(max_curvature > 0.0, "curvature bound degenerate");
  cfg.eta = 0.8 / max_curvature;

  const ExperimentArtifacts art = run_pipeline(cfg);
  std::map<int, std::vector<double>> losses_by_crop;
  for (const RoundLog& log : art.season.logs)
    losses_by_crop[log.crop_id].push_back(log.cluster_loss);
  c.expect(losses_by_crop.size() == 6, "expected logs for 6 clusters");
  for (const auto& [crop, losses] : losses_by_crop) {
    c.expect(losses.size() == 15, "crop " + std::to_string(crop) + " missed rounds");
    for (std::size_t t = 1; t < losses.size(); ++t)
      c.expect(losses[t] <= losses[t - 1],
               "crop " + std::to_string(crop) + " loss increased at round " +
                   std::to_string(t));
    c.expect(losses.back() <= 0.5 * losses.front(),
             "crop " + std::to_string(crop) + " final loss " +
                 std::to_string(losses.back()) + " not half of round-0 " +
                 std::to_string(losses.front()));
  }
}

void criterion_hierarchy_advantage(Checker& c) {
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 1; seed <= 5 && c.ok; ++seed) {
    ExperimentConfig cfg;  // defaults: N=10, K=6, d=6, heterogeneity 2.0, noise 0.1
    cfg.seed = seed;
    const ExperimentArtifacts art = run_pipeline(cfg);
    const double crop = art.report.mean_rmse(ModelTag::Crop);
    const double global = art.report.mean_rmse(ModelTag::Global);
    const double baseline = art.report.mean_rmse(ModelTag::Baseline);
    c.expect(crop * 1.5 <= global, "seed " + std::to_string(seed) + ": crop rmse " +
                                       std::to_string(crop) + " not 1.5x under global " +
                                       std::to_string(global));
    c.expect(crop * 1.5 <= baseline, "seed " + std::to_string(seed) + ": crop rmse " +
                                         std::to_string(crop) +
                                         " not 1.5x under baseline " +
                                         std::to_string(baseline));
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 60.0, "took " + std::to_string(elapsed) + " s (budget 60 s)");
}

void criterion_homogeneous_null(Checker& c) {
  for (std::uint64_t seed = 1; seed <= 5 && c.ok; ++seed) {
    ExperimentConfig cfg;
    cfg.heterogeneity = 0.0;
    cfg.identical_profiles = true;
    cfg.seed = seed;
    const ExperimentArtifacts art = run_pipeline(cfg);
    const double crop = art.report.mean_rmse(ModelTag::Crop);
    const double global = art.report.mean_rmse(ModelTag::Global);
    const double diff = std::fabs(crop - global) / std::max(crop, global);
    c.expect(diff < 0.10, "seed " + std::to_string(seed) + ": crop " +
                              std::to_string(crop) + " vs global " +
                              std::to_string(global) + " differ by " +
                              std::to_string(100.0 * diff) + "%");
  }
}

void criterion_determinism(Checker& c, const fs::path& tmp) {
  const fs::path cfg_path = tmp / "det_config.json";
  std::ofstream(cfg_path) << R"({"seed": 5})";
  const fs::path out1 = tmp / "det_run1";
  const fs::path out2 = tmp / "det_run2";

  c.expect(run_tool("run --config " + cfg_path.string() + " --out " + out1.string()) == 0,
           "first run failed");
  c.expect(run_tool("run --config " + cfg_path.string() + " --out " + out2.string()) == 0,
           "second run failed");
  for (const char* name : {"report.csv", "rounds.csv", "models.json"}) {
    const std::string a = slurp(out1 / name);
    c.expect(!a.empty() && a == slurp(out2 / name),
             std::string(name) + " differs between identical runs");
  }
}

void criterion_objective_identity(Checker& c) {
  SplitMix64 rng(909);
  const ModelSpec spec{ModelKind::Linear, 3, {}, Activation::Tanh};
  std::vector<Dataset> farms;
  Dataset pooled;
  pooled.dim = 3;
  for (int f = 0; f < 4; ++f) {
    Dataset ds = oracle::random_dataset(3, 10 + rng.bounded(50), rng);
    ds.farm_id = f;
    pooled.features.insert(pooled.features.end(), ds.features.begin(), ds.features.end());
    pooled.targets.insert(pooled.targets.end(), ds.targets.begin(), ds.targets.end());
    farms.push_back(std::move(ds));
  }
  for (int rep = 0; rep < 20 && c.ok; ++rep) {
    const ParamVector w = oracle::random_params(spec, rng);
    const double objective = global_objective(w, farms);
    const double pooled_mse = mse_loss(w, pooled);
    const double err = std::fabs(objective - pooled_mse) /
                       std::max(1e-300, std::fabs(pooled_mse));
    c.expect(err <= 1e-12, "rep " + std::to_string(rep) + ": relative gap " +
                               std::to_string(err));
  }
}

void criterion_cli_contract(Checker& c, const fs::path& tmp) {
  // {} resolves to the reference defaults
  const fs::path empty_cfg = tmp / "empty.json";
  std::ofstream(empty_cfg) << "{}";
  const fs::path out = tmp / "cli_defaults";
  c.expect(run_tool("run --config " + empty_cfg.string() + " --out " + out.string()) == 0,
           "default run failed");
  const nlohmann::json resolved = nlohmann::json::parse(slurp(out / "config.resolved.json"),
                                                        nullptr, false);
  c.expect(!resolved.is_discarded(), "resolved config unreadable");
  if (c.ok) {
    c.expect(resolved["N"] == 10 && resolved["K"] == 6 && resolved["E"] == 10,
             "resolved defaults are not N=10, K=6, E=10");
    const auto rounds = resolved["T_k"];
    c.expect(rounds.is_array() && rounds.size() == 6, "T_k not expanded to 6 entries");
    for (const auto& t : rounds) c.expect(t == 15, "T_k default is not 15");
  }

  // N < K rejected with exit 1
  const fs::path bad_cfg = tmp / "bad.json";
  std::ofstream(bad_cfg) << R"({"N": 3, "K": 6})";
  c.expect(run_tool("run --config " + bad_cfg.string() + " --out " +
                    (tmp / "cli_bad").string()) == 1,
           "N<K did not exit with code 1");

  // resolved-config replay is byte-identical
  const fs::path replay_out = tmp / "cli_replay";
  c.expect(run_tool("run --config " + (out / "config.resolved.json").string() + " --out " +
                    replay_out.string()) == 0,
           "replay run failed");
  for (const char* name : {"report.csv", "rounds.csv", "models.json"}) {
    const std::string a = slurp(out / name);
    c.expect(!a.empty() && a == slurp(replay_out / name),
             std::string(name) + " differs under resolved-config replay");
  }
}

}  // namespace

int main() {
  const fs::path tmp = fs::current_path() / "acceptance_tmp";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp);

  struct Criterion {
    int id;
    std::string name;
    std::function<void(Checker&)> body;
  };

  const std::vector<Criterion> criteria = {
      {1, "gradient matches central finite differences (100 triples, <10 s)",
       [](Checker& c) { criterion_gradient(c); }},
      {2, "aggregation algebra (identity, envelope, fixed point, permutation, scaling)",
       [](Checker& c) { criterion_aggregation(c); }},
      {3, "K=1 season equals flat FedAvg oracle bit for bit (10 seeds)",
       [](Checker& c) { criterion_fedavg_reduction(c); }},
      {4, "single-member cluster equals plain GD over T_k*E epochs",
       [](Checker& c) { criterion_single_member(c); }},
      {5, "cluster losses non-increasing, final <= 0.5x round-0 (noiseless)",
       [](Checker& c) { criterion_descent(c); }},
      {6, "crop models beat global and baseline by >= 1.5x (5 seeds, <60 s)",
       [](Checker& c) { criterion_hierarchy_advantage(c); }},
      {7, "identical crops: crop vs global rmse within 10% (5 seeds)",
       [](Checker& c) { criterion_homogeneous_null(c); }},
      {8, "repeated CLI runs are byte-identical",
       [&tmp](Checker& c) { criterion_determinism(c, tmp); }},
      {9, "global objective equals pooled MSE within 1e-12 (20 vectors)",
       [](Checker& c) { criterion_objective_identity(c); }},
      {10, "CLI contract: defaults, N<K exit code, resolved replay",
       [&tmp](Checker& c) { criterion_cli_contract(c, tmp); }},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    Checker checker;
    try {
      criterion.body(checker);
    } catch (const std::exception& e) {
      checker.ok = false;
      checker.detail = std::string("exception: ") + e.what();
    }
    if (checker.ok) {
      std::printf("[PASS] criterion %d: %s\n", criterion.id, criterion.name.c_str());
    } else {
      std::printf("[FAIL] criterion %d: %s -- %s\n", criterion.id, criterion.name.c_str(),
                  checker.detail.c_str());
      ++failures;
    }
  }

  fs::remove_all(tmp, ec);
  return failures;
}
