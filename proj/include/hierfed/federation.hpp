#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "hierfed/model.hpp"

namespace hierfed {

// Seasonal farm -> crop assignment. Construction guarantees at least one
// farm per crop.
struct SubscriptionPlan {
  int num_farms = 0;  // N
  int num_crops = 0;  // K
  std::map<int, int> assignments;  // farm_id -> crop_id

  void validate() const;
  // Member farm ids per crop, ascending within each crop.
  std::vector<std::vector<int>> members_by_crop() const;
};

// Farms 0..K-1 get one crop each via a seeded shuffle; the rest subscribe
// uniformly at random. Deterministic in (N, K, seed).
SubscriptionPlan subscribe_farms(int num_farms, int num_crops, std::uint64_t seed);

struct Cluster {
  int crop_id = 0;
  std::vector<int> members;
  ParamVector model;  // theta_k
  int rounds = 0;     // T_k

  void validate() const;
};

struct MemberRoundLog {
  int farm_id = 0;
  std::size_t examples = 0;  // n_i
  double loss_before = 0.0;  // on the incoming cluster model
  double loss_after = 0.0;   // on the farm's local update
};

struct RoundLog {
  int crop_id = 0;
  int round = 0;  // t
  std::vector<MemberRoundLog> members;  // ascending farm_id
  std::size_t cluster_examples = 0;     // N_k
  double cluster_loss = 0.0;            // weighted train loss after aggregation
};

// Componentwise sum of (n_i / sum n) * model_i, accumulated in input order.
// Callers pass models in canonical (sorted-key) order for bit-stability.
ParamVector weighted_average(const std::vector<ParamVector>& models,
                             const std::vector<std::size_t>& sizes);

struct ClusterRunResult {
  Cluster cluster;
  std::vector<RoundLog> logs;
  std::map<int, ParamVector> local_models;  // w_i after the final round
};

// T_k rounds of parallel member updates followed by weighted aggregation.
// Members are processed in ascending farm_id regardless of schedule, so the
// result is bit-identical under any policy.
ClusterRunResult run_cluster_rounds(const Cluster& cluster,
                                    const std::map<int, Dataset>& datasets,
                                    const TrainConfig& cfg,
                                    ExecPolicy policy = ExecPolicy::OpenMP);

// alpha_k-weighted mean of the cluster models, alpha_k = N_k / sum N_j,
// accumulated in ascending crop_id order.
ParamVector global_aggregate(const std::vector<Cluster>& clusters,
                             const std::vector<std::size_t>& cluster_sizes);

// Season-level inputs, assembled by the experiment layer.
struct SeasonConfig {
  ModelSpec model;
  TrainConfig train;
  SubscriptionPlan plan;
  std::vector<int> rounds_per_crop;  // T_k, size K
  long long baseline_epochs = 0;
  std::uint64_t init_seed = 0;  // theta_init, shared by every cluster
  // When set (e.g. a previous season's global model), it is theta_init and
  // init_seed is ignored.
  std::optional<ParamVector> init_model;

  void validate() const;
};

struct SeasonResult {
  std::map<int, ParamVector> local_models;  // farm_id -> w_i
  std::map<int, ParamVector> crop_models;   // crop_id -> theta_k
  ParamVector global_model;
  ParamVector baseline_model;
  std::vector<RoundLog> logs;
};

// Full season: shared theta_init, per-cluster rounds, global aggregation,
// and the pooled centralized baseline. Bit-deterministic in its inputs.
SeasonResult run_season(const SeasonConfig& cfg, const std::map<int, Dataset>& train_data,
                        ExecPolicy policy = ExecPolicy::OpenMP);

// Pools every dataset (in the order given) and runs plain full-batch GD for
// total_epochs from init_params(spec, seed).
ParamVector centralized_baseline(const std::vector<Dataset>& all_datasets,
                                 const ModelSpec& spec, const TrainConfig& cfg,
                                 long long total_epochs, std::uint64_t seed,
                                 ExecPolicy policy = ExecPolicy::OpenMP);

}  // namespace hierfed
