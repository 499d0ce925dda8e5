#include "hierfed/metrics.hpp"

#include <cmath>

namespace hierfed {

namespace {

void check_lengths(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.empty()) throw std::invalid_argument("empty prediction vector");
  if (predictions.size() != targets.size())
    throw std::invalid_argument("predictions and targets must have equal length");
}

struct SquaredErrors {
  double sse = 0.0;
  double sst = 0.0;
};

SquaredErrors squared_errors(std::span<const double> predictions,
                             std::span<const double> targets) {
  SquaredErrors e;
  double mean = 0.0;
  for (double t : targets) mean += t;
  mean /= static_cast<double>(targets.size());
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const double r = predictions[j] - targets[j];
    e.sse += r * r;
    const double c = targets[j] - mean;
    e.sst += c * c;
  }
  return e;
}

std::vector<double> predict_all(const ParamVector& model, const Dataset& test) {
  std::vector<double> preds(test.size());
  for (std::size_t j = 0; j < test.size(); ++j)
    preds[j] = predict(model, std::span<const double>(test.row(j),
                                                      static_cast<std::size_t>(test.dim)));
  return preds;
}

EvalRow make_row(ModelTag tag, int tag_id, const ParamVector& model, const Dataset& test,
                 int crop_id) {
  const std::vector<double> preds = predict_all(model, test);
  const SquaredErrors e = squared_errors(preds, test.targets);
  const double n = static_cast<double>(test.size());
  EvalRow row;
  row.tag = tag;
  row.tag_id = tag_id;
  row.farm_id = test.farm_id;
  row.crop_id = crop_id;
  row.rmse = std::sqrt(e.sse / n);
  double abs_sum = 0.0;
  for (std::size_t j = 0; j < preds.size(); ++j)
    abs_sum += std::fabs(preds[j] - test.targets[j]);
  row.mae = abs_sum / n;
  row.r2 = (e.sst == 0.0) ? 0.0 : 1.0 - e.sse / e.sst;
  row.degenerate_sst = (e.sst == 0.0 && e.sse > 0.0);
  row.n_test = test.size();
  return row;
}

}  // namespace

double rmse(std::span<const double> predictions, std::span<const double> targets) {
  check_lengths(predictions, targets);
  return std::sqrt(squared_errors(predictions, targets).sse /
                   static_cast<double>(targets.size()));
}

double mae(std::span<const double> predictions, std::span<const double> targets) {
  check_lengths(predictions, targets);
  double acc = 0.0;
  for (std::size_t j = 0; j < targets.size(); ++j)
    acc += std::fabs(predictions[j] - targets[j]);
  return acc / static_cast<double>(targets.size());
}

double r2(std::span<const double> predictions, std::span<const double> targets) {
  check_lengths(predictions, targets);
  const SquaredErrors e = squared_errors(predictions, targets);
  if (e.sst == 0.0) return 0.0;
  return 1.0 - e.sse / e.sst;
}

std::string to_string(ModelTag tag) {
  switch (tag) {
    case ModelTag::Local: return "local";
    case ModelTag::Crop: return "crop";
    case ModelTag::Global: return "global";
    case ModelTag::Baseline: return "baseline";
  }
  return "unknown";
}

double EvalReport::mean_rmse(ModelTag tag) const {
  double acc = 0.0;
  std::size_t count = 0;
  for (const EvalRow& row : rows) {
    if (row.tag == tag) {
      acc += row.rmse;
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("no rows with the requested tag");
  return acc / static_cast<double>(count);
}

double global_objective(const ParamVector& params, const std::vector<Dataset>& datasets,
                        ExecPolicy policy) {
  if (datasets.empty()) throw std::invalid_argument("global_objective over no datasets");
  std::size_t total = 0;
  for (const Dataset& ds : datasets) total += ds.size();
  double objective = 0.0;
  for (const Dataset& ds : datasets) {
    const double w = static_cast<double>(ds.size()) / static_cast<double>(total);
    objective += w * mse_loss(params, ds, policy);
  }
  return objective;
}

EvalReport evaluate_season(const SeasonResult& result,
                           const std::map<int, Dataset>& test_sets,
                           const SubscriptionPlan& plan, ExecPolicy policy) {
  plan.validate();
  std::vector<int> farms;
  for (const auto& [farm, crop] : plan.assignments) {
    if (!test_sets.contains(farm))
      throw std::invalid_argument("no test set for farm " + std::to_string(farm));
    if (!result.local_models.contains(farm))
      throw std::invalid_argument("no local model for farm " + std::to_string(farm));
    if (!result.crop_models.contains(crop))
      throw std::invalid_argument("no crop model for crop " + std::to_string(crop));
    farms.push_back(farm);
  }

  const int n = static_cast<int>(farms.size());
  std::vector<std::vector<EvalRow>> per_farm(n);

  auto eval_farm = [&](int i) {
    const int farm = farms[i];
    const int crop = plan.assignments.at(farm);
    const Dataset& test = test_sets.at(farm);
    per_farm[i].push_back(
        make_row(ModelTag::Local, farm, result.local_models.at(farm), test, crop));
    per_farm[i].push_back(
        make_row(ModelTag::Crop, crop, result.crop_models.at(crop), test, crop));
    per_farm[i].push_back(make_row(ModelTag::Global, -1, result.global_model, test, crop));
    per_farm[i].push_back(
        make_row(ModelTag::Baseline, -1, result.baseline_model, test, crop));
  };

  if (policy == ExecPolicy::OpenMP) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) eval_farm(i);
  } else {
    for (int i = 0; i < n; ++i) eval_farm(i);
  }

  EvalReport report;
  for (auto& rows : per_farm)
    for (auto& row : rows) report.rows.push_back(row);
  return report;
}

std::vector<std::pair<double, double>> prediction_trace(const ParamVector& model,
                                                        const Dataset& test) {
  std::vector<std::pair<double, double>> trace;
  trace.reserve(test.size());
  for (std::size_t j = 0; j < test.size(); ++j) {
    const double pred = predict(
        model, std::span<const double>(test.row(j), static_cast<std::size_t>(test.dim)));
    trace.emplace_back(test.targets[j], pred);
  }
  return trace;
}

}  // namespace hierfed
