#include "hierfed/federation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "hierfed/rng.hpp"

namespace hierfed {

namespace {

// Weighted train loss of a model over the cluster's members, accumulated in
// member order (callers pass ascending farm_id).
double cluster_train_loss(const ParamVector& model, const std::vector<int>& members,
                          const std::map<int, Dataset>& datasets, std::size_t total) {
  double loss = 0.0;
  for (int id : members) {
    const Dataset& ds = datasets.at(id);
    const double w = static_cast<double>(ds.size()) / static_cast<double>(total);
    loss += w * mse_loss(model, ds, ExecPolicy::Serial);
  }
  return loss;
}

}  // namespace

void SubscriptionPlan::validate() const {
  if (num_crops < 1) throw std::invalid_argument("K must be >= 1");
  if (num_farms < num_crops)
    throw std::invalid_argument("N must be >= K (at least one farm per crop)");
  if (assignments.size() != static_cast<std::size_t>(num_farms))
    throw std::invalid_argument("every farm must appear exactly once");
  std::vector<int> count(num_crops, 0);
  for (const auto& [farm, crop] : assignments) {
    if (crop < 0 || crop >= num_crops)
      throw std::invalid_argument("crop_id out of range for farm " + std::to_string(farm));
    ++count[crop];
  }
  for (int k = 0; k < num_crops; ++k)
    if (count[k] == 0)
      throw std::invalid_argument("crop " + std::to_string(k) + " has no subscribed farm");
}

std::vector<std::vector<int>> SubscriptionPlan::members_by_crop() const {
  std::vector<std::vector<int>> groups(num_crops);
  for (const auto& [farm, crop] : assignments) groups[crop].push_back(farm);
  for (auto& g : groups) std::sort(g.begin(), g.end());
  return groups;
}

SubscriptionPlan subscribe_farms(int num_farms, int num_crops, std::uint64_t seed) {
  if (num_crops < 1) throw std::invalid_argument("K must be >= 1");
  if (num_farms < num_crops)
    throw std::invalid_argument("N=" + std::to_string(num_farms) + " < K=" +
                                std::to_string(num_crops) +
                                ": cannot give every crop a farm");
  SplitMix64 rng(derive_seed(seed, SeedTag::Subscription));

  // Fisher-Yates over the crop ids; farm i < K takes shuffled[i].
  std::vector<int> shuffled(num_crops);
  std::iota(shuffled.begin(), shuffled.end(), 0);
  for (int i = num_crops - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(i) + 1));
    std::swap(shuffled[i], shuffled[j]);
  }

  SubscriptionPlan plan;
  plan.num_farms = num_farms;
  plan.num_crops = num_crops;
  for (int farm = 0; farm < num_crops; ++farm) plan.assignments[farm] = shuffled[farm];
  for (int farm = num_crops; farm < num_farms; ++farm)
    plan.assignments[farm] = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(num_crops)));
  return plan;
}

void Cluster::validate() const {
  if (members.empty()) throw std::invalid_argument("cluster has no members");
  std::set<int> unique(members.begin(), members.end());
  if (unique.size() != members.size())
    throw std::invalid_argument("cluster members must be distinct");
  model.validate();
  if (rounds < 0) throw std::invalid_argument("rounds must be >= 0");
}

ParamVector weighted_average(const std::vector<ParamVector>& models,
                             const std::vector<std::size_t>& sizes) {
  if (models.empty()) throw std::invalid_argument("weighted_average of nothing");
  if (models.size() != sizes.size())
    throw std::invalid_argument("models and sizes must have equal length");
  const ModelSpec& spec = models.front().spec;
  std::size_t total = 0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (models[i].spec != spec)
      throw std::invalid_argument("weighted_average over mismatched model specs");
    if (models[i].values.size() != models.front().values.size())
      throw std::invalid_argument("weighted_average over mismatched lengths");
    if (sizes[i] == 0) throw std::invalid_argument("weighted_average with a zero size");
    total += sizes[i];
  }
  ParamVector out{spec, std::vector<double>(models.front().values.size(), 0.0)};
  for (std::size_t i = 0; i < models.size(); ++i) {
    const double w = static_cast<double>(sizes[i]) / static_cast<double>(total);
    const std::vector<double>& v = models[i].values;
    for (std::size_t c = 0; c < v.size(); ++c) out.values[c] += w * v[c];
  }
  return out;
}

ClusterRunResult run_cluster_rounds(const Cluster& cluster,
                                    const std::map<int, Dataset>& datasets,
                                    const TrainConfig& cfg, ExecPolicy policy) {
  cluster.validate();
  std::vector<int> members = cluster.members;
  std::sort(members.begin(), members.end());  // canonical order
  const int n_members = static_cast<int>(members.size());

  std::vector<std::size_t> sizes(n_members);
  std::size_t total = 0;
  for (int m = 0; m < n_members; ++m) {
    const auto it = datasets.find(members[m]);
    if (it == datasets.end())
      throw std::invalid_argument("no dataset for farm " + std::to_string(members[m]));
    if (it->second.dim != cluster.model.spec.input_dim)
      throw std::invalid_argument("dataset width mismatch for farm " +
                                  std::to_string(members[m]));
    sizes[m] = it->second.size();
    total += sizes[m];
  }

  ClusterRunResult result;
  result.cluster = cluster;
  result.cluster.members = members;
  ParamVector theta = cluster.model;

  std::vector<ParamVector> updated(n_members);
  std::vector<double> loss_before(n_members), loss_after(n_members);
  std::vector<std::string> failures(n_members);
  std::vector<int> failed_epoch(n_members, -1);

  for (int t = 0; t < cluster.rounds; ++t) {
    std::fill(failures.begin(), failures.end(), std::string());

    auto run_member = [&](int m) {
      try {
        const Dataset& ds = datasets.at(members[m]);
        loss_before[m] = mse_loss(theta, ds, ExecPolicy::Serial);
        updated[m] = local_update(theta, ds, cfg, ExecPolicy::Serial);
        loss_after[m] = mse_loss(updated[m], ds, ExecPolicy::Serial);
        if (!std::isfinite(loss_before[m]) || !std::isfinite(loss_after[m]))
          throw DivergenceError("non-finite loss", -1);
      } catch (const DivergenceError& e) {
        failures[m] = e.what();
        failed_epoch[m] = e.epoch();
      } catch (const std::exception& e) {
        failures[m] = e.what();
      }
    };

    if (policy == ExecPolicy::OpenMP) {
#pragma omp parallel for schedule(static)
      for (int m = 0; m < n_members; ++m) run_member(m);
    } else {
      for (int m = 0; m < n_members; ++m) run_member(m);
    }

    // lowest-index failure wins so the error is schedule-independent
    for (int m = 0; m < n_members; ++m) {
      if (!failures[m].empty())
        throw DivergenceError("farm " + std::to_string(members[m]) + ", round " +
                                  std::to_string(t) + ": " + failures[m],
                              failed_epoch[m], members[m], t);
    }

    theta = weighted_average(updated, sizes);

    RoundLog log;
    log.crop_id = cluster.crop_id;
    log.round = t;
    log.cluster_examples = total;
    log.cluster_loss = cluster_train_loss(theta, members, datasets, total);
    if (!std::isfinite(log.cluster_loss))
      throw DivergenceError("crop " + std::to_string(cluster.crop_id) + ", round " +
                                std::to_string(t) + ": non-finite cluster loss",
                            -1, -1, t);
    for (int m = 0; m < n_members; ++m)
      log.members.push_back({members[m], sizes[m], loss_before[m], loss_after[m]});
    result.logs.push_back(std::move(log));
  }

  result.cluster.model = theta;
  if (cluster.rounds > 0)
    for (int m = 0; m < n_members; ++m) result.local_models.emplace(members[m], updated[m]);
  return result;
}

ParamVector global_aggregate(const std::vector<Cluster>& clusters,
                             const std::vector<std::size_t>& cluster_sizes) {
  if (clusters.empty()) throw std::invalid_argument("global_aggregate of nothing");
  if (clusters.size() != cluster_sizes.size())
    throw std::invalid_argument("clusters and sizes must have equal length");
  std::vector<std::size_t> order(clusters.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return clusters[a].crop_id < clusters[b].crop_id;
  });
  std::vector<ParamVector> models;
  std::vector<std::size_t> sizes;
  for (std::size_t i : order) {
    models.push_back(clusters[i].model);
    sizes.push_back(cluster_sizes[i]);
  }
  return weighted_average(models, sizes);
}

void SeasonConfig::validate() const {
  model.validate();
  train.validate();
  plan.validate();
  if (rounds_per_crop.size() != static_cast<std::size_t>(plan.num_crops))
    throw std::invalid_argument("rounds_per_crop must have one entry per crop");
  for (int t : rounds_per_crop)
    if (t < 1) throw std::invalid_argument("T_k must be >= 1");
  if (baseline_epochs < 1) throw std::invalid_argument("baseline_epochs must be >= 1");
  if (init_model) {
    init_model->validate();
    if (init_model->spec != model)
      throw std::invalid_argument("init_model spec does not match the season model spec");
  }
}

SeasonResult run_season(const SeasonConfig& cfg, const std::map<int, Dataset>& train_data,
                        ExecPolicy policy) {
  cfg.validate();
  for (const auto& [farm, crop] : cfg.plan.assignments)
    if (!train_data.contains(farm))
      throw std::invalid_argument("no training data for farm " + std::to_string(farm));

  const ParamVector theta_init =
      cfg.init_model ? *cfg.init_model : init_params(cfg.model, cfg.init_seed);
  const auto groups = cfg.plan.members_by_crop();
  const int num_crops = cfg.plan.num_crops;

  std::vector<ClusterRunResult> runs(num_crops);
  std::vector<std::string> failures(num_crops);
  std::vector<DivergenceError> errors(num_crops, DivergenceError("", -1));

  auto run_crop = [&](int k) {
    try {
      Cluster cluster{k, groups[k], theta_init, cfg.rounds_per_crop[k]};
      runs[k] = run_cluster_rounds(cluster, train_data, cfg.train, policy);
    } catch (const DivergenceError& e) {
      failures[k] = e.what();
      errors[k] = e;
    } catch (const std::exception& e) {
      failures[k] = e.what();
    }
  };

  if (policy == ExecPolicy::OpenMP) {
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < num_crops; ++k) run_crop(k);
  } else {
    for (int k = 0; k < num_crops; ++k) run_crop(k);
  }
  for (int k = 0; k < num_crops; ++k) {
    if (!failures[k].empty()) {
      if (errors[k].epoch() >= 0 || errors[k].round() >= 0)
        throw DivergenceError("crop " + std::to_string(k) + ": " + failures[k],
                              errors[k].epoch(), errors[k].farm_id(), errors[k].round());
      throw std::runtime_error("crop " + std::to_string(k) + ": " + failures[k]);
    }
  }

  SeasonResult result;
  std::vector<Cluster> finals;
  std::vector<std::size_t> cluster_sizes;
  for (int k = 0; k < num_crops; ++k) {
    std::size_t nk = 0;
    for (int farm : groups[k]) nk += train_data.at(farm).size();
    cluster_sizes.push_back(nk);
    finals.push_back(runs[k].cluster);
    result.crop_models.emplace(k, runs[k].cluster.model);
    for (auto& [farm, w] : runs[k].local_models) result.local_models.emplace(farm, w);
    for (auto& log : runs[k].logs) result.logs.push_back(std::move(log));
  }
  result.global_model = global_aggregate(finals, cluster_sizes);

  std::vector<Dataset> pooled;
  for (const auto& [farm, ds] : train_data) pooled.push_back(ds);
  result.baseline_model = centralized_baseline(pooled, cfg.model, cfg.train,
                                               cfg.baseline_epochs, cfg.init_seed, policy);
  return result;
}

ParamVector centralized_baseline(const std::vector<Dataset>& all_datasets,
                                 const ModelSpec& spec, const TrainConfig& cfg,
                                 long long total_epochs, std::uint64_t seed,
                                 ExecPolicy policy) {
  if (all_datasets.empty()) throw std::invalid_argument("no datasets to pool");
  if (total_epochs < 1) throw std::invalid_argument("total_epochs must be >= 1");
  Dataset pooled;
  pooled.farm_id = -1;
  pooled.dim = all_datasets.front().dim;
  for (const Dataset& ds : all_datasets) {
    if (ds.dim != pooled.dim)
      throw std::invalid_argument("pooled datasets must share a feature width");
    pooled.features.insert(pooled.features.end(), ds.features.begin(), ds.features.end());
    pooled.targets.insert(pooled.targets.end(), ds.targets.begin(), ds.targets.end());
  }

  ParamVector p = init_params(spec, seed);
  for (long long e = 0; e < total_epochs; ++e) {
    const ParamVector g = gradient(p, pooled, policy);
    for (std::size_t c = 0; c < p.values.size(); ++c)
      p.values[c] -= cfg.learning_rate * g.values[c];
    if (!p.all_finite())
      throw DivergenceError("centralized baseline diverged at epoch " + std::to_string(e),
                            static_cast<int>(e));
  }
  return p;
}

}  // namespace hierfed
