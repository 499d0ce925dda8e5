#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hierfed/experiment.hpp"
#include "hierfed/metrics.hpp"
#include "hierfed/rng.hpp"
#include "oracles.hpp"

using namespace hierfed;

TEST_CASE("rmse/mae/r2 basics") {
  const std::vector<double> targets{2.0, 4.0};
  CHECK(rmse(targets, targets) == 0.0);
  CHECK(mae(targets, targets) == 0.0);
  CHECK(r2(targets, targets) == 1.0);

  const std::vector<double> preds{1.0, 3.0};
  CHECK(rmse(preds, targets) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mae(preds, targets) == doctest::Approx(1.0).epsilon(1e-15));

  // constant predictor at the target mean: SSE == SST
  const std::vector<double> mean_pred{3.0, 3.0};
  CHECK(r2(mean_pred, targets) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("r2 degenerate SST policy") {
  const std::vector<double> constant{5.0, 5.0, 5.0};
  CHECK(r2(constant, constant) == 0.0);                       // SST == 0, SSE == 0
  CHECK(r2(std::vector<double>{1.0, 2.0, 3.0}, constant) == 0.0);  // SST == 0, SSE > 0
}

TEST_CASE("metric input validation") {
  const std::vector<double> a{1.0, 2.0};
  const std::vector<double> b{1.0};
  CHECK_THROWS_AS(rmse(a, b), std::invalid_argument);
  CHECK_THROWS_AS(mae(std::vector<double>{}, std::vector<double>{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(r2(a, b), std::invalid_argument);
}

TEST_CASE("rmse^2 equals the mean squared residual") {
  SplitMix64 rng(500);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 1 + rng.bounded(64);
    std::vector<double> preds(n), targets(n);
    for (std::size_t j = 0; j < n; ++j) {
      preds[j] = rng.uniform(-10, 10);
      targets[j] = rng.uniform(-10, 10);
    }
    double msr = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double r = preds[j] - targets[j];
      msr += r * r;
    }
    msr /= static_cast<double>(n);
    const double v = rmse(preds, targets);
    CHECK(oracle::rel_err(v * v, msr) < 1e-12);
  }
}

TEST_CASE("global_objective: single farm, equal-weight mean, pooled identity") {
  SplitMix64 rng(600);
  const ModelSpec spec{ModelKind::Linear, 2, {}, Activation::Tanh};
  const ParamVector w = oracle::random_params(spec, rng);

  const Dataset one = oracle::random_dataset(2, 30, rng);
  CHECK(global_objective(w, {one}) == mse_loss(w, one));

  // two farms with equal sizes average their losses
  const Dataset d1 = oracle::random_dataset(2, 16, rng);
  const Dataset d2 = oracle::random_dataset(2, 16, rng);
  const double expected = 0.5 * mse_loss(w, d1) + 0.5 * mse_loss(w, d2);
  CHECK(oracle::rel_err(global_objective(w, {d1, d2}), expected) < 1e-15);

  // weighted decomposition of the pooled MSE
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<Dataset> farms;
    Dataset pooled;
    pooled.dim = 2;
    const std::size_t count = 1 + rng.bounded(5);
    for (std::size_t i = 0; i < count; ++i) {
      Dataset ds = oracle::random_dataset(2, 1 + rng.bounded(40), rng);
      pooled.features.insert(pooled.features.end(), ds.features.begin(), ds.features.end());
      pooled.targets.insert(pooled.targets.end(), ds.targets.begin(), ds.targets.end());
      farms.push_back(std::move(ds));
    }
    const ParamVector wr = oracle::random_params(spec, rng);
    CHECK(oracle::rel_err(global_objective(wr, farms), mse_loss(wr, pooled)) < 1e-12);
  }
}

TEST_CASE("prediction_trace") {
  const ModelSpec spec{ModelKind::Linear, 1, {}, Activation::Tanh};
  Dataset test;
  test.dim = 1;
  test.features = {1.0, 2.0, 3.0};
  test.targets = {2.0, 4.0, 6.0};

  const auto zero_trace = prediction_trace(ParamVector{spec, {0.0, 0.0}}, test);
  REQUIRE(zero_trace.size() == test.size());
  for (const auto& [actual, pred] : zero_trace) CHECK(pred == 0.0);
  CHECK(zero_trace[1].first == 4.0);

  const auto perfect = prediction_trace(ParamVector{spec, {2.0, 0.0}}, test);
  for (const auto& [actual, pred] : perfect) CHECK(pred == doctest::Approx(actual));
}

TEST_CASE("evaluate_season: K=1 gives identical Crop and Global rows") {
  ExperimentConfig cfg;
  cfg.num_farms = 4;
  cfg.num_crops = 1;
  cfg.dim = 3;
  cfg.rounds = {5};
  cfg.local_epochs = 3;
  cfg.n_train = 30;
  cfg.n_test = 10;
  cfg.feature_low.assign(3, -1.0);
  cfg.feature_high.assign(3, 1.0);
  cfg.seed = 3;
  const auto art = run_pipeline(cfg);

  REQUIRE(art.report.rows.size() == 4u * 4u);
  for (std::size_t i = 0; i < art.report.rows.size(); i += 4) {
    const EvalRow& crop = art.report.rows[i + 1];
    const EvalRow& global = art.report.rows[i + 2];
    CHECK(crop.tag == ModelTag::Crop);
    CHECK(global.tag == ModelTag::Global);
    CHECK(crop.rmse == global.rmse);
    CHECK(crop.mae == global.mae);
    CHECK(crop.r2 == global.r2);
  }
}

TEST_CASE("evaluate_season: noiseless realizable setup is learned to high accuracy") {
  ExperimentConfig cfg;
  cfg.num_farms = 6;
  cfg.num_crops = 2;
  cfg.dim = 3;
  cfg.rounds = {25, 25};
  cfg.local_epochs = 10;
  cfg.eta = 0.1;
  cfg.noise_std = 0.0;
  cfg.heterogeneity = 1.0;
  cfg.n_train = 40;
  cfg.n_test = 15;
  cfg.feature_low.assign(3, -1.0);
  cfg.feature_high.assign(3, 1.0);
  cfg.seed = 12;
  const auto art = run_pipeline(cfg);
  for (const EvalRow& row : art.report.rows) {
    if (row.tag == ModelTag::Local || row.tag == ModelTag::Crop) {
      CHECK(row.rmse < 1e-3);
      CHECK(row.r2 > 0.999);
    }
  }
}

TEST_CASE("evaluate_season: crop models beat the global model under heterogeneity") {
  ExperimentConfig cfg;  // reference defaults: K=6, d=6, heterogeneity 2.0
  cfg.seed = 42;
  const auto art = run_pipeline(cfg);
  CHECK(art.report.mean_rmse(ModelTag::Crop) < art.report.mean_rmse(ModelTag::Global));
}

TEST_CASE("evaluate_season: rejects missing inputs") {
  ExperimentConfig cfg;
  cfg.num_farms = 3;
  cfg.num_crops = 2;
  cfg.dim = 2;
  cfg.rounds = {2, 2};
  cfg.local_epochs = 2;
  cfg.n_train = 10;
  cfg.n_test = 5;
  cfg.feature_low.assign(2, -1.0);
  cfg.feature_high.assign(2, 1.0);
  const auto art = run_pipeline(cfg);

  auto missing_tests = art.test_sets;
  missing_tests.erase(missing_tests.begin());
  CHECK_THROWS_AS(evaluate_season(art.season, missing_tests, art.plan),
                  std::invalid_argument);
}

TEST_CASE("evaluate_season flags degenerate SST") {
  const ModelSpec spec{ModelKind::Linear, 1, {}, Activation::Tanh};
  SeasonResult season;
  season.local_models.emplace(0, ParamVector{spec, {0.0, 0.0}});
  season.crop_models.emplace(0, ParamVector{spec, {0.0, 0.0}});
  season.global_model = ParamVector{spec, {0.0, 0.0}};
  season.baseline_model = ParamVector{spec, {0.0, 0.0}};

  SubscriptionPlan plan;
  plan.num_farms = 1;
  plan.num_crops = 1;
  plan.assignments = {{0, 0}};

  Dataset constant;
  constant.farm_id = 0;
  constant.dim = 1;
  constant.features = {1.0, 2.0};
  constant.targets = {3.0, 3.0};  // SST == 0, zero model misses -> SSE > 0

  const EvalReport report = evaluate_season(season, {{0, constant}}, plan);
  for (const EvalRow& row : report.rows) {
    CHECK(row.r2 == 0.0);
    CHECK(row.degenerate_sst);
  }
}
