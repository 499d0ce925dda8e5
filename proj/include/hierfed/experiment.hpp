#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hierfed/federation.hpp"
#include "hierfed/metrics.hpp"
#include "hierfed/model.hpp"
#include "hierfed/synth.hpp"

namespace hierfed {

// Everything a season needs, as read from the JSON config. Defaults are the
// reference setup: N=10 farms, K=6 crops, E=10 local epochs, T_k=15 rounds.
struct ExperimentConfig {
  int num_farms = 10;          // N
  int num_crops = 6;           // K
  int dim = 6;                 // d
  int local_epochs = 10;       // E
  std::vector<int> rounds = std::vector<int>(6, 15);  // T_k per crop
  double eta = 0.05;
  ModelSpec model{ModelKind::Linear, 6, {}, Activation::Tanh};

  double heterogeneity = 2.0;
  double noise_std = 0.1;
  double nonlinearity_scale = 0.0;
  double farm_offset_std = 0.0;
  std::size_t n_train = 100;
  std::size_t n_test = 25;
  std::vector<double> feature_low = std::vector<double>(6, -1.0);   // per-dimension
  std::vector<double> feature_high = std::vector<double>(6, 1.0);
  bool identical_profiles = false;

  long long baseline_epochs = -1;  // -1: derive max(T_k) * E at resolve time
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  void validate() const;
};

// Parse a JSON config object. Missing fields take defaults, unknown fields
// are rejected, `overrides` are dotted key=value pairs applied on top.
ExperimentConfig parse_config_text(const std::string& json_text,
                                   const std::vector<std::string>& overrides = {});
ExperimentConfig load_config_file(const std::string& path,
                                  const std::vector<std::string>& overrides = {});

// Canonical JSON with every field explicit (lists expanded, baseline epochs
// resolved); feeding it back reproduces the run byte for byte.
std::string resolved_config_json(const ExperimentConfig& cfg);

// In-memory results of one full experiment.
struct ExperimentArtifacts {
  ExperimentConfig cfg;
  std::vector<CropProfile> profiles;
  SubscriptionPlan plan;
  std::vector<FarmProfile> farms;
  std::map<int, Dataset> train_sets;
  std::map<int, Dataset> test_sets;
  SeasonResult season;
  EvalReport report;
};

GeneratorConfig build_generator(const ExperimentConfig& cfg);
std::vector<FarmProfile> build_farm_profiles(const ExperimentConfig& cfg,
                                             const GeneratorConfig& gen,
                                             const SubscriptionPlan& plan);
SeasonConfig build_season_config(const ExperimentConfig& cfg, const SubscriptionPlan& plan);

// Generate -> run_season -> evaluate, no file I/O.
ExperimentArtifacts run_pipeline(const ExperimentConfig& cfg,
                                 ExecPolicy policy = ExecPolicy::OpenMP);

// Pipeline plus all output files (config.resolved.json, report.csv,
// rounds.csv, per-farm traces, models.json) in cfg.out_dir. Files written
// this run are removed again if anything fails.
void run_experiment(const ExperimentConfig& cfg, ExecPolicy policy = ExecPolicy::OpenMP);

// `gen` subcommand: write config.resolved.json, subscription.csv and the
// per-farm train/test CSVs.
void run_generate(const ExperimentConfig& cfg, ExecPolicy policy = ExecPolicy::OpenMP);

// `eval` subcommand: re-evaluate saved models against test data. Test sets
// come from `data_dir` CSVs when given, otherwise they are regenerated from
// the config. Writes report.csv into out_dir.
void run_reevaluate(const ExperimentConfig& cfg, const std::string& models_path,
                    const std::string& data_dir, ExecPolicy policy = ExecPolicy::OpenMP);

// models.json serialization (used by run/eval and their tests).
std::string models_to_json(const SeasonResult& season);
SeasonResult models_from_json(const std::string& json_text);

std::string report_to_csv(const EvalReport& report);
std::string rounds_to_csv(const std::vector<RoundLog>& logs);

}  // namespace hierfed
