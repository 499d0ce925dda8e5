#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hierfed/federation.hpp"
#include "hierfed/model.hpp"

namespace hierfed {

double rmse(std::span<const double> predictions, std::span<const double> targets);
double mae(std::span<const double> predictions, std::span<const double> targets);
// 1 - SSE/SST; 0 whenever SST == 0 (perfect or not), see EvalRow::degenerate_sst.
double r2(std::span<const double> predictions, std::span<const double> targets);

enum class ModelTag { Local, Crop, Global, Baseline };

std::string to_string(ModelTag tag);

// One evaluation of one model on one farm's test split.
struct EvalRow {
  ModelTag tag = ModelTag::Local;
  int tag_id = -1;   // farm_id for Local, crop_id for Crop, -1 otherwise
  int farm_id = 0;   // farm evaluated on
  int crop_id = 0;   // that farm's crop
  double rmse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
  std::size_t n_test = 0;
  bool degenerate_sst = false;  // SST == 0 with SSE > 0: r2 pinned to 0
};

struct EvalReport {
  std::vector<EvalRow> rows;

  double mean_rmse(ModelTag tag) const;
};

// (n_i / N)-weighted mean of per-farm MSE losses: the global empirical risk,
// measured rather than optimized.
double global_objective(const ParamVector& params, const std::vector<Dataset>& datasets,
                        ExecPolicy policy = ExecPolicy::Serial);

// Local, Crop, Global, Baseline evaluated on every farm's test split.
EvalReport evaluate_season(const SeasonResult& result,
                           const std::map<int, Dataset>& test_sets,
                           const SubscriptionPlan& plan,
                           ExecPolicy policy = ExecPolicy::OpenMP);

// Pointwise (y_actual, y_pred) in test-set order, for plot export.
std::vector<std::pair<double, double>> prediction_trace(const ParamVector& model,
                                                        const Dataset& test);

}  // namespace hierfed
