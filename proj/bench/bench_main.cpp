// Timing comparison of the serial and OpenMP execution paths. Besides the
// wall times it checks that both paths produce bit-identical results.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "hierfed/experiment.hpp"
#include "hierfed/federation.hpp"
#include "hierfed/model.hpp"
#include "hierfed/rng.hpp"

using namespace hierfed;

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double best_of(F&& f, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_ms();
    f();
    best = std::min(best, now_ms() - t0);
  }
  return best;
}

Dataset random_dataset(int dim, std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Dataset ds;
  ds.dim = dim;
  ds.features.resize(n * static_cast<std::size_t>(dim));
  ds.targets.resize(n);
  for (double& v : ds.features) v = rng.uniform(-1.0, 1.0);
  for (double& v : ds.targets) v = rng.uniform(-5.0, 5.0);
  return ds;
}

void report(const std::string& name, double serial_ms, double omp_ms, bool identical) {
  std::printf("%-28s %10.2f ms %10.2f ms   %5.2fx   %s\n", name.c_str(), serial_ms, omp_ms,
              serial_ms / omp_ms, identical ? "bit-identical" : "MISMATCH");
}

void bench_gradient(const std::string& name, const ModelSpec& spec, std::size_t n,
                    int reps) {
  const Dataset ds = random_dataset(spec.input_dim, n, 7);
  ParamVector p = init_params(spec, 3);
  if (spec.kind == ModelKind::Linear) {
    SplitMix64 rng(11);
    for (double& v : p.values) v = rng.uniform(-1.0, 1.0);
  }
  const ParamVector gs = gradient(p, ds, ExecPolicy::Serial);
  const ParamVector gp = gradient(p, ds, ExecPolicy::OpenMP);
  const double serial_ms = best_of([&] { gradient(p, ds, ExecPolicy::Serial); }, reps);
  const double omp_ms = best_of([&] { gradient(p, ds, ExecPolicy::OpenMP); }, reps);
  report(name, serial_ms, omp_ms, gs.values == gp.values);
}

void bench_cluster_round(std::size_t members, std::size_t n_per_member, int reps) {
  const ModelSpec spec{ModelKind::Linear, 8, {}, Activation::Tanh};
  std::map<int, Dataset> datasets;
  std::vector<int> ids;
  for (std::size_t m = 0; m < members; ++m) {
    Dataset ds = random_dataset(spec.input_dim, n_per_member, 100 + m);
    ds.farm_id = static_cast<int>(m);
    datasets.emplace(static_cast<int>(m), std::move(ds));
    ids.push_back(static_cast<int>(m));
  }
  const Cluster cluster{0, ids, init_params(spec, 0), 2};
  const TrainConfig cfg{0.01, 5, BatchMode::FullBatch};

  const auto rs = run_cluster_rounds(cluster, datasets, cfg, ExecPolicy::Serial);
  const auto rp = run_cluster_rounds(cluster, datasets, cfg, ExecPolicy::OpenMP);
  const double serial_ms =
      best_of([&] { run_cluster_rounds(cluster, datasets, cfg, ExecPolicy::Serial); }, reps);
  const double omp_ms =
      best_of([&] { run_cluster_rounds(cluster, datasets, cfg, ExecPolicy::OpenMP); }, reps);
  report("cluster_round", serial_ms, omp_ms,
         rs.cluster.model.values == rp.cluster.model.values);
}

void bench_season(int farms, int crops, std::size_t n_train, int reps) {
  ExperimentConfig cfg;
  cfg.num_farms = farms;
  cfg.num_crops = crops;
  cfg.dim = 8;
  cfg.local_epochs = 3;
  cfg.rounds.assign(crops, 3);
  cfg.eta = 0.02;
  cfg.n_train = n_train;
  cfg.n_test = 32;
  cfg.feature_low.assign(cfg.dim, -1.0);
  cfg.feature_high.assign(cfg.dim, 1.0);
  cfg.seed = 5;

  const auto as = run_pipeline(cfg, ExecPolicy::Serial);
  const auto ap = run_pipeline(cfg, ExecPolicy::OpenMP);
  const double serial_ms = best_of([&] { run_pipeline(cfg, ExecPolicy::Serial); }, reps);
  const double omp_ms = best_of([&] { run_pipeline(cfg, ExecPolicy::OpenMP); }, reps);
  report("season_pipeline", serial_ms, omp_ms,
         as.season.global_model.values == ap.season.global_model.values &&
             as.season.baseline_model.values == ap.season.baseline_model.values);
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  int reps = 3;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) quick = true;
    else if (std::strcmp(argv[i], "--reps") == 0 && i + 1 < argc) reps = std::atoi(argv[++i]);
    else {
      std::fprintf(stderr, "usage: %s [--quick] [--reps R]\n", argv[0]);
      return 1;
    }
  }

  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-28s %13s %13s %8s   %s\n", "kernel", "serial", "openmp", "speedup",
              "outputs");

  const std::size_t scale = quick ? 1 : 16;
  bench_gradient("linear_gradient", ModelSpec{ModelKind::Linear, 32, {}, Activation::Tanh},
                 12500 * scale, reps);
  bench_gradient("mlp_gradient",
                 ModelSpec{ModelKind::Mlp, 16, {32, 16}, Activation::Tanh}, 1250 * scale,
                 reps);
  bench_cluster_round(quick ? 4 : 24, quick ? 256 : 4000, reps);
  bench_season(quick ? 6 : 24, quick ? 3 : 4, quick ? 128 : 2000, reps);
  return 0;
}
