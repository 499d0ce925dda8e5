#include "hierfed/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hierfed/csv.hpp"
#include "hierfed/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hierfed {

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw std::invalid_argument(msg); }

void check_known_keys(const json& obj, const char* where,
                      const std::vector<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      config_error(std::string("unknown config field ") + where + key);
  }
}

long long get_integer(const json& obj, const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) config_error("field " + key + " must be an integer");
  return v.get<long long>();
}

double get_number(const json& obj, const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_number()) config_error("field " + key + " must be a number");
  return v.get<double>();
}

// Scalar broadcasts to `count` entries; arrays must match exactly.
std::vector<double> get_number_list(const json& obj, const std::string& key, int count) {
  const json& v = obj.at(key);
  if (v.is_number()) return std::vector<double>(count, v.get<double>());
  if (!v.is_array()) config_error("field " + key + " must be a number or an array");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) config_error("field " + key + " must contain numbers");
    out.push_back(e.get<double>());
  }
  if (out.size() != static_cast<std::size_t>(count))
    config_error("field " + key + " must have " + std::to_string(count) + " entries");
  return out;
}

ModelSpec parse_model(const json& obj, int dim) {
  check_known_keys(obj, "model.", {"kind", "hidden_dims", "activation"});
  ModelSpec spec;
  spec.input_dim = dim;
  if (obj.contains("kind")) {
    const std::string kind = obj.at("kind").is_string() ? obj.at("kind").get<std::string>()
                                                        : std::string();
    if (kind == "linear")
      spec.kind = ModelKind::Linear;
    else if (kind == "mlp")
      spec.kind = ModelKind::Mlp;
    else
      config_error("field model.kind must be \"linear\" or \"mlp\"");
  }
  if (obj.contains("hidden_dims")) {
    const json& dims = obj.at("hidden_dims");
    if (!dims.is_array()) config_error("field model.hidden_dims must be an array");
    for (const json& e : dims) {
      if (!e.is_number_integer()) config_error("field model.hidden_dims must contain integers");
      spec.hidden_dims.push_back(e.get<int>());
    }
  }
  if (obj.contains("activation")) {
    const std::string act = obj.at("activation").is_string()
                                ? obj.at("activation").get<std::string>()
                                : std::string();
    if (act == "relu")
      spec.activation = Activation::ReLU;
    else if (act == "tanh")
      spec.activation = Activation::Tanh;
    else
      config_error("field model.activation must be \"relu\" or \"tanh\"");
  }
  return spec;
}

json model_to_json(const ModelSpec& spec) {
  json j;
  j["kind"] = spec.kind == ModelKind::Linear ? "linear" : "mlp";
  j["hidden_dims"] = spec.hidden_dims;
  j["activation"] = spec.activation == Activation::ReLU ? "relu" : "tanh";
  return j;
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec spec;
  spec.input_dim = j.at("input_dim").get<int>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear")
    spec.kind = ModelKind::Linear;
  else if (kind == "mlp")
    spec.kind = ModelKind::Mlp;
  else
    config_error("models.json: unknown model kind " + kind);
  spec.hidden_dims = j.at("hidden_dims").get<std::vector<int>>();
  spec.activation = j.at("activation").get<std::string>() == "relu" ? Activation::ReLU
                                                                    : Activation::Tanh;
  spec.validate();
  return spec;
}

long long resolved_baseline_epochs(const ExperimentConfig& cfg) {
  if (cfg.baseline_epochs > 0) return cfg.baseline_epochs;
  const int max_rounds = *std::max_element(cfg.rounds.begin(), cfg.rounds.end());
  return static_cast<long long>(max_rounds) * cfg.local_epochs;
}

// Applies one dotted key=value override onto the config json.
void apply_override(json& root, const std::string& setting) {
  const std::size_t eq = setting.find('=');
  if (eq == std::string::npos || eq == 0)
    config_error("override must look like key=value, got: " + setting);
  const std::string path = setting.substr(0, eq);
  const std::string raw = setting.substr(eq + 1);

  json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = raw;  // bare words are strings

  json* node = &root;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) config_error("override has an empty key segment: " + setting);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (!node->is_object() && !node->is_null())
      config_error("override path " + path + " descends into a non-object");
    start = dot + 1;
  }
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

// Records every file written so a failed run can remove its partial output.
class OutputTracker {
 public:
  void write(const fs::path& path, const std::string& content) {
    write_text_file(path, content);
    written_.push_back(path);
  }

  void discard_all() {
    for (const fs::path& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    written_.clear();
  }

 private:
  std::vector<fs::path> written_;
};

std::string trace_to_csv(const std::vector<std::pair<double, double>>& trace) {
  std::string out = "index,y_actual,y_pred\n";
  for (std::size_t j = 0; j < trace.size(); ++j) {
    out += std::to_string(j);
    out += ',';
    out += format_float(trace[j].first);
    out += ',';
    out += format_float(trace[j].second);
    out += '\n';
  }
  return out;
}

const ParamVector& model_for_tag(const SeasonResult& season, ModelTag tag, int farm,
                                 int crop) {
  switch (tag) {
    case ModelTag::Local: return season.local_models.at(farm);
    case ModelTag::Crop: return season.crop_models.at(crop);
    case ModelTag::Global: return season.global_model;
    case ModelTag::Baseline: return season.baseline_model;
  }
  throw std::logic_error("bad tag");
}

std::map<int, Dataset> import_test_sets(const std::string& data_dir,
                                        const SubscriptionPlan& plan) {
  std::map<int, Dataset> test_sets;
  for (const auto& [farm, crop] : plan.assignments) {
    const fs::path path = fs::path(data_dir) / ("farm_" + std::to_string(farm) + "_test.csv");
    if (!fs::exists(path))
      throw std::invalid_argument("missing test data file " + path.string());
    test_sets.emplace(farm, import_dataset_csv(path.string(), farm));
  }
  return test_sets;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (num_crops < 1) config_error("field K must be >= 1");
  if (num_farms < num_crops)
    config_error("field N must be >= K (N=" + std::to_string(num_farms) +
                 ", K=" + std::to_string(num_crops) + ")");
  if (dim < 1) config_error("field d must be >= 1");
  if (local_epochs < 1) config_error("field E must be >= 1");
  if (rounds.size() != static_cast<std::size_t>(num_crops))
    config_error("field T_k must be a scalar or a list with one entry per crop");
  for (int t : rounds)
    if (t < 1) config_error("field T_k entries must be >= 1");
  if (!(eta > 0.0)) config_error("field eta must be > 0");
  ModelSpec checked = model;
  checked.input_dim = dim;
  try {
    checked.validate();
  } catch (const std::invalid_argument& e) {
    config_error(std::string("field model: ") + e.what());
  }
  if (heterogeneity < 0.0) config_error("field generator.heterogeneity must be >= 0");
  if (noise_std < 0.0) config_error("field generator.noise_std must be >= 0");
  if (nonlinearity_scale < 0.0)
    config_error("field generator.nonlinearity_scale must be >= 0");
  if (farm_offset_std < 0.0) config_error("field generator.farm_offset_std must be >= 0");
  if (n_train < 1) config_error("field generator.n_train must be >= 1");
  if (n_test < 1) config_error("field generator.n_test must be >= 1");
  if (feature_low.size() != static_cast<std::size_t>(dim) ||
      feature_high.size() != static_cast<std::size_t>(dim))
    config_error("fields generator.feature_low/feature_high must have d entries");
  for (int c = 0; c < dim; ++c)
    if (!(feature_low[c] < feature_high[c]))
      config_error("field generator.feature_low must be < feature_high componentwise");
  if (baseline_epochs != -1 && baseline_epochs < 1)
    config_error("field baseline_epochs must be >= 1 when set");
  if (out_dir.empty()) config_error("field out_dir must not be empty");
}

ExperimentConfig parse_config_text(const std::string& json_text,
                                   const std::vector<std::string>& overrides) {
  json root = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) config_error("malformed JSON config");
  if (!root.is_object()) config_error("config must be a JSON object");
  for (const std::string& setting : overrides) apply_override(root, setting);

  check_known_keys(root, "", {"N", "K", "d", "E", "T_k", "eta", "model", "generator",
                              "baseline_epochs", "seed", "out_dir"});

  ExperimentConfig cfg;
  if (root.contains("N")) cfg.num_farms = static_cast<int>(get_integer(root, "N"));
  if (root.contains("K")) cfg.num_crops = static_cast<int>(get_integer(root, "K"));
  if (root.contains("d")) cfg.dim = static_cast<int>(get_integer(root, "d"));
  if (root.contains("E")) cfg.local_epochs = static_cast<int>(get_integer(root, "E"));
  if (root.contains("eta")) cfg.eta = get_number(root, "eta");
  if (root.contains("seed")) {
    const long long s = get_integer(root, "seed");
    if (s < 0) config_error("field seed must be a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (root.contains("out_dir")) {
    if (!root.at("out_dir").is_string()) config_error("field out_dir must be a string");
    cfg.out_dir = root.at("out_dir").get<std::string>();
  }
  if (root.contains("baseline_epochs")) {
    if (!root.at("baseline_epochs").is_null())
      cfg.baseline_epochs = get_integer(root, "baseline_epochs");
  }

  if (cfg.num_crops < 1) config_error("field K must be >= 1");
  if (root.contains("T_k")) {
    const json& tk = root.at("T_k");
    if (tk.is_number_integer()) {
      cfg.rounds.assign(cfg.num_crops, tk.get<int>());
    } else if (tk.is_array()) {
      cfg.rounds.clear();
      for (const json& e : tk) {
        if (!e.is_number_integer()) config_error("field T_k must contain integers");
        cfg.rounds.push_back(e.get<int>());
      }
    } else {
      config_error("field T_k must be an integer or a list of integers");
    }
  } else {
    cfg.rounds.assign(cfg.num_crops, 15);
  }

  if (cfg.dim < 1) config_error("field d must be >= 1");
  cfg.feature_low.assign(cfg.dim, -1.0);
  cfg.feature_high.assign(cfg.dim, 1.0);
  if (root.contains("generator")) {
    const json& gen = root.at("generator");
    if (!gen.is_object()) config_error("field generator must be an object");
    check_known_keys(gen, "generator.",
                     {"heterogeneity", "noise_std", "nonlinearity_scale", "farm_offset_std",
                      "n_train", "n_test", "feature_low", "feature_high",
                      "identical_profiles"});
    if (gen.contains("heterogeneity")) cfg.heterogeneity = get_number(gen, "heterogeneity");
    if (gen.contains("noise_std")) cfg.noise_std = get_number(gen, "noise_std");
    if (gen.contains("nonlinearity_scale"))
      cfg.nonlinearity_scale = get_number(gen, "nonlinearity_scale");
    if (gen.contains("farm_offset_std"))
      cfg.farm_offset_std = get_number(gen, "farm_offset_std");
    if (gen.contains("n_train")) {
      const long long n = get_integer(gen, "n_train");
      if (n < 1) config_error("field generator.n_train must be >= 1");
      cfg.n_train = static_cast<std::size_t>(n);
    }
    if (gen.contains("n_test")) {
      const long long n = get_integer(gen, "n_test");
      if (n < 1) config_error("field generator.n_test must be >= 1");
      cfg.n_test = static_cast<std::size_t>(n);
    }
    if (gen.contains("feature_low"))
      cfg.feature_low = get_number_list(gen, "feature_low", cfg.dim);
    if (gen.contains("feature_high"))
      cfg.feature_high = get_number_list(gen, "feature_high", cfg.dim);
    if (gen.contains("identical_profiles")) {
      if (!gen.at("identical_profiles").is_boolean())
        config_error("field generator.identical_profiles must be a boolean");
      cfg.identical_profiles = gen.at("identical_profiles").get<bool>();
    }
  }

  if (root.contains("model")) {
    const json& model = root.at("model");
    if (!model.is_object()) config_error("field model must be an object");
    cfg.model = parse_model(model, cfg.dim);
  } else {
    cfg.model.input_dim = cfg.dim;
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path,
                                  const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), overrides);
}

std::string resolved_config_json(const ExperimentConfig& cfg) {
  json j;
  j["N"] = cfg.num_farms;
  j["K"] = cfg.num_crops;
  j["d"] = cfg.dim;
  j["E"] = cfg.local_epochs;
  j["T_k"] = cfg.rounds;
  j["eta"] = cfg.eta;
  j["model"] = model_to_json(cfg.model);
  j["generator"] = {{"heterogeneity", cfg.heterogeneity},
                    {"noise_std", cfg.noise_std},
                    {"nonlinearity_scale", cfg.nonlinearity_scale},
                    {"farm_offset_std", cfg.farm_offset_std},
                    {"n_train", cfg.n_train},
                    {"n_test", cfg.n_test},
                    {"feature_low", cfg.feature_low},
                    {"feature_high", cfg.feature_high},
                    {"identical_profiles", cfg.identical_profiles}};
  j["baseline_epochs"] = resolved_baseline_epochs(cfg);
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  return j.dump(2) + "\n";
}

GeneratorConfig build_generator(const ExperimentConfig& cfg) {
  GeneratorConfig gen;
  gen.dim = cfg.dim;
  gen.num_crops = cfg.num_crops;
  gen.profiles = make_crop_profiles(cfg.dim, cfg.num_crops, cfg.heterogeneity, cfg.seed);
  if (cfg.identical_profiles) {
    for (int k = 1; k < cfg.num_crops; ++k) {
      gen.profiles[k] = gen.profiles[0];
      gen.profiles[k].crop_id = k;
    }
  }
  for (CropProfile& p : gen.profiles) {
    p.noise_std = cfg.noise_std;
    p.nonlinearity_scale = cfg.nonlinearity_scale;
  }
  gen.feature_low = cfg.feature_low;
  gen.feature_high = cfg.feature_high;
  gen.farm_offset_std = cfg.farm_offset_std;
  gen.seed = cfg.seed;
  gen.validate();
  return gen;
}

std::vector<FarmProfile> build_farm_profiles(const ExperimentConfig& cfg,
                                             const GeneratorConfig& gen,
                                             const SubscriptionPlan& plan) {
  std::vector<FarmProfile> farms;
  for (const auto& [farm, crop] : plan.assignments)
    farms.push_back({farm, crop, farm_offset_for(gen, farm), cfg.n_train, cfg.n_test});
  return farms;
}

SeasonConfig build_season_config(const ExperimentConfig& cfg, const SubscriptionPlan& plan) {
  SeasonConfig season;
  season.model = cfg.model;
  season.model.input_dim = cfg.dim;
  season.train = TrainConfig{cfg.eta, cfg.local_epochs, BatchMode::FullBatch};
  season.plan = plan;
  season.rounds_per_crop = cfg.rounds;
  season.baseline_epochs = resolved_baseline_epochs(cfg);
  season.init_seed = cfg.seed;
  return season;
}

ExperimentArtifacts run_pipeline(const ExperimentConfig& cfg, ExecPolicy policy) {
  cfg.validate();
  ExperimentArtifacts art;
  art.cfg = cfg;
  art.plan = subscribe_farms(cfg.num_farms, cfg.num_crops, cfg.seed);
  const GeneratorConfig gen = build_generator(cfg);
  art.profiles = gen.profiles;
  art.farms = build_farm_profiles(cfg, gen, art.plan);

  const int n = static_cast<int>(art.farms.size());
  std::vector<FarmData> data(n);
  if (policy == ExecPolicy::OpenMP) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) data[i] = generate_farm_dataset(gen, art.farms[i]);
  } else {
    for (int i = 0; i < n; ++i) data[i] = generate_farm_dataset(gen, art.farms[i]);
  }
  for (int i = 0; i < n; ++i) {
    art.train_sets.emplace(art.farms[i].farm_id, std::move(data[i].train));
    art.test_sets.emplace(art.farms[i].farm_id, std::move(data[i].test));
  }

  art.season = run_season(build_season_config(cfg, art.plan), art.train_sets, policy);
  art.report = evaluate_season(art.season, art.test_sets, art.plan, policy);
  return art;
}

std::string report_to_csv(const EvalReport& report) {
  std::string out = "model_tag,farm_id,crop_id,rmse,mae,r2,n_test\n";
  for (const EvalRow& row : report.rows) {
    out += to_string(row.tag);
    out += ',';
    out += std::to_string(row.farm_id);
    out += ',';
    out += std::to_string(row.crop_id);
    out += ',';
    out += format_float(row.rmse);
    out += ',';
    out += format_float(row.mae);
    out += ',';
    out += format_float(row.r2);
    out += ',';
    out += std::to_string(row.n_test);
    out += '\n';
  }
  return out;
}

std::string rounds_to_csv(const std::vector<RoundLog>& logs) {
  std::string out = "crop_id,round,farm_id,loss_before,loss_after,cluster_loss\n";
  for (const RoundLog& log : logs) {
    for (const MemberRoundLog& m : log.members) {
      out += std::to_string(log.crop_id);
      out += ',';
      out += std::to_string(log.round);
      out += ',';
      out += std::to_string(m.farm_id);
      out += ',';
      out += format_float(m.loss_before);
      out += ',';
      out += format_float(m.loss_after);
      out += ',';
      out += format_float(log.cluster_loss);
      out += '\n';
    }
  }
  return out;
}

std::string models_to_json(const SeasonResult& season) {
  json j;
  json spec = model_to_json(season.global_model.spec);
  spec["input_dim"] = season.global_model.spec.input_dim;
  j["spec"] = spec;
  json locals = json::object();
  for (const auto& [farm, p] : season.local_models) locals[std::to_string(farm)] = p.values;
  j["local_models"] = locals;
  json crops = json::object();
  for (const auto& [crop, p] : season.crop_models) crops[std::to_string(crop)] = p.values;
  j["crop_models"] = crops;
  j["global_model"] = season.global_model.values;
  j["baseline_model"] = season.baseline_model.values;
  return j.dump(2) + "\n";
}

SeasonResult models_from_json(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) config_error("malformed models.json");
  const ModelSpec spec = spec_from_json(j.at("spec"));

  auto to_params = [&](const json& values) {
    ParamVector p{spec, values.get<std::vector<double>>()};
    p.validate();
    return p;
  };

  SeasonResult season;
  for (const auto& [key, values] : j.at("local_models").items())
    season.local_models.emplace(std::stoi(key), to_params(values));
  for (const auto& [key, values] : j.at("crop_models").items())
    season.crop_models.emplace(std::stoi(key), to_params(values));
  season.global_model = to_params(j.at("global_model"));
  season.baseline_model = to_params(j.at("baseline_model"));
  return season;
}

void run_experiment(const ExperimentConfig& cfg, ExecPolicy policy) {
  const ExperimentArtifacts art = run_pipeline(cfg, policy);

  const fs::path out_dir(cfg.out_dir);
  fs::create_directories(out_dir);
  OutputTracker tracker;
  try {
    tracker.write(out_dir / "config.resolved.json", resolved_config_json(cfg));
    tracker.write(out_dir / "report.csv", report_to_csv(art.report));
    tracker.write(out_dir / "rounds.csv", rounds_to_csv(art.season.logs));
    tracker.write(out_dir / "models.json", models_to_json(art.season));
    for (const auto& [farm, test] : art.test_sets) {
      const int crop = art.plan.assignments.at(farm);
      for (ModelTag tag :
           {ModelTag::Local, ModelTag::Crop, ModelTag::Global, ModelTag::Baseline}) {
        const ParamVector& model = model_for_tag(art.season, tag, farm, crop);
        const fs::path path = out_dir / ("trace_" + std::to_string(farm) + "_" +
                                         to_string(tag) + ".csv");
        tracker.write(path, trace_to_csv(prediction_trace(model, test)));
      }
    }
  } catch (...) {
    tracker.discard_all();
    throw;
  }
}

void run_generate(const ExperimentConfig& cfg, ExecPolicy policy) {
  cfg.validate();
  const SubscriptionPlan plan = subscribe_farms(cfg.num_farms, cfg.num_crops, cfg.seed);
  const GeneratorConfig gen = build_generator(cfg);
  const std::vector<FarmProfile> farms = build_farm_profiles(cfg, gen, plan);

  const int n = static_cast<int>(farms.size());
  std::vector<FarmData> data(n);
  if (policy == ExecPolicy::OpenMP) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) data[i] = generate_farm_dataset(gen, farms[i]);
  } else {
    for (int i = 0; i < n; ++i) data[i] = generate_farm_dataset(gen, farms[i]);
  }

  const fs::path out_dir(cfg.out_dir);
  fs::create_directories(out_dir);
  OutputTracker tracker;
  try {
    tracker.write(out_dir / "config.resolved.json", resolved_config_json(cfg));
    std::string sub = "farm_id,crop_id\n";
    for (const auto& [farm, crop] : plan.assignments)
      sub += std::to_string(farm) + "," + std::to_string(crop) + "\n";
    tracker.write(out_dir / "subscription.csv", sub);
    for (int i = 0; i < n; ++i) {
      const int farm = farms[i].farm_id;
      const fs::path train = out_dir / ("farm_" + std::to_string(farm) + "_train.csv");
      const fs::path test = out_dir / ("farm_" + std::to_string(farm) + "_test.csv");
      export_dataset_csv(data[i].train, train.string());
      export_dataset_csv(data[i].test, test.string());
    }
  } catch (...) {
    tracker.discard_all();
    throw;
  }
}

void run_reevaluate(const ExperimentConfig& cfg, const std::string& models_path,
                    const std::string& data_dir, ExecPolicy policy) {
  cfg.validate();
  std::ifstream in(models_path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open models file " + models_path);
  std::stringstream buf;
  buf << in.rdbuf();
  const SeasonResult season = models_from_json(buf.str());
  if (season.global_model.spec.input_dim != cfg.dim)
    throw std::invalid_argument("models.json input_dim does not match config d");

  const SubscriptionPlan plan = subscribe_farms(cfg.num_farms, cfg.num_crops, cfg.seed);

  std::map<int, Dataset> test_sets;
  if (!data_dir.empty()) {
    test_sets = import_test_sets(data_dir, plan);
  } else {
    const GeneratorConfig gen = build_generator(cfg);
    for (const FarmProfile& farm : build_farm_profiles(cfg, gen, plan))
      test_sets.emplace(farm.farm_id, generate_farm_dataset(gen, farm).test);
  }

  const EvalReport report = evaluate_season(season, test_sets, plan, policy);
  const fs::path out_dir(cfg.out_dir);
  fs::create_directories(out_dir);
  write_text_file(out_dir / "report.csv", report_to_csv(report));
}

}  // namespace hierfed
