#include "hierfed/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hierfed/csv.hpp"
#include "hierfed/rng.hpp"

namespace hierfed {

namespace {

constexpr int kMaxSeparationAttempts = 1000;
constexpr double kBaseYieldLow = 8.0;
constexpr double kBaseYieldHigh = 12.0;

double pairwise_min_distance(const std::vector<CropProfile>& profiles) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < profiles.size(); ++a) {
    for (std::size_t b = a + 1; b < profiles.size(); ++b) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < profiles[a].weight_vector.size(); ++c) {
        const double diff = profiles[a].weight_vector[c] - profiles[b].weight_vector[c];
        d2 += diff * diff;
      }
      best = std::min(best, std::sqrt(d2));
    }
  }
  return best;
}

}  // namespace

void GeneratorConfig::validate() const {
  if (dim < 1) throw std::invalid_argument("generator dim must be >= 1");
  if (num_crops < 1) throw std::invalid_argument("generator num_crops must be >= 1");
  if (profiles.size() != static_cast<std::size_t>(num_crops))
    throw std::invalid_argument("generator needs exactly K crop profiles");
  std::vector<int> ids;
  for (const auto& p : profiles) {
    if (p.weight_vector.size() != static_cast<std::size_t>(dim))
      throw std::invalid_argument("crop weight_vector length must equal dim");
    if (p.noise_std < 0.0) throw std::invalid_argument("noise_std must be >= 0");
    if (p.nonlinearity_scale < 0.0)
      throw std::invalid_argument("nonlinearity_scale must be >= 0");
    ids.push_back(p.crop_id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw std::invalid_argument("crop profiles must have distinct crop_ids");
  if (feature_low.size() != static_cast<std::size_t>(dim) ||
      feature_high.size() != static_cast<std::size_t>(dim))
    throw std::invalid_argument("feature bounds must have one entry per dimension");
  for (int c = 0; c < dim; ++c)
    if (!(feature_low[c] < feature_high[c]))
      throw std::invalid_argument("feature_low must be < feature_high componentwise");
  if (farm_offset_std < 0.0) throw std::invalid_argument("farm_offset_std must be >= 0");
}

const CropProfile& GeneratorConfig::profile_for(int crop_id) const {
  for (const auto& p : profiles)
    if (p.crop_id == crop_id) return p;
  throw std::invalid_argument("no crop profile with crop_id " + std::to_string(crop_id));
}

std::vector<CropProfile> make_crop_profiles(int dim, int num_crops, double heterogeneity,
                                            std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (num_crops < 1) throw std::invalid_argument("num_crops must be >= 1");
  if (heterogeneity < 0.0) throw std::invalid_argument("heterogeneity must be >= 0");

  for (int attempt = 0; attempt < kMaxSeparationAttempts; ++attempt) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(attempt), SeedTag::CropProfiles));
    std::vector<CropProfile> profiles(num_crops);
    for (int k = 0; k < num_crops; ++k) {
      profiles[k].crop_id = k;
      profiles[k].weight_vector.resize(dim);
      for (double& w : profiles[k].weight_vector) w = rng.uniform(-1.0, 1.0);
      profiles[k].base_yield = rng.uniform(kBaseYieldLow, kBaseYieldHigh);
    }
    if (heterogeneity == 0.0 || num_crops == 1) return profiles;

    const double min_dist = pairwise_min_distance(profiles);
    if (min_dist >= heterogeneity) return profiles;
    if (min_dist <= heterogeneity / 100.0) continue;  // near-degenerate draw, retry

    // Rescale every vector so the smallest pairwise distance clears the
    // threshold; small margin absorbs the rounding of the scale factor.
    const double scale = (heterogeneity / min_dist) * (1.0 + 1e-9);
    for (auto& p : profiles)
      for (double& w : p.weight_vector) w *= scale;
    if (pairwise_min_distance(profiles) >= heterogeneity) return profiles;
  }
  throw std::runtime_error("could not separate crop profiles to heterogeneity " +
                           std::to_string(heterogeneity) + " after " +
                           std::to_string(kMaxSeparationAttempts) + " attempts");
}

double true_yield(const CropProfile& profile, double farm_offset, std::span<const double> x) {
  if (x.size() != profile.weight_vector.size())
    throw std::invalid_argument("feature vector length does not match crop weight_vector");
  double y = profile.base_yield;
  double dot = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) dot += profile.weight_vector[c] * x[c];
  y += dot;
  const std::size_t second = x.size() > 1 ? 1 : 0;
  y += profile.nonlinearity_scale * std::sin(x[0] * x[second]);
  y += farm_offset;
  return y;
}

double farm_offset_for(const GeneratorConfig& gen, int farm_id) {
  if (gen.farm_offset_std == 0.0) return 0.0;
  SplitMix64 rng(derive_seed(gen.seed, static_cast<std::uint64_t>(farm_id), SeedTag::FarmOffset));
  return rng.normal(0.0, gen.farm_offset_std);
}

FarmData generate_farm_dataset(const GeneratorConfig& gen, const FarmProfile& farm) {
  gen.validate();
  if (farm.n_train < 1 || farm.n_test < 1)
    throw std::invalid_argument("n_train and n_test must be >= 1");
  const CropProfile& profile = gen.profile_for(farm.crop_id);

  auto make_split = [&](std::size_t n, SeedTag feat_tag, SeedTag noise_tag) {
    Dataset ds;
    ds.farm_id = farm.farm_id;
    ds.dim = gen.dim;
    ds.features.resize(n * static_cast<std::size_t>(gen.dim));
    ds.targets.resize(n);
    SplitMix64 feat(derive_seed(gen.seed, static_cast<std::uint64_t>(farm.farm_id), feat_tag));
    SplitMix64 noise(derive_seed(gen.seed, static_cast<std::uint64_t>(farm.farm_id), noise_tag));
    for (std::size_t j = 0; j < n; ++j)
      for (int c = 0; c < gen.dim; ++c)
        ds.features[j * gen.dim + c] = feat.uniform(gen.feature_low[c], gen.feature_high[c]);
    for (std::size_t j = 0; j < n; ++j) {
      const std::span<const double> x(ds.row(j), static_cast<std::size_t>(gen.dim));
      ds.targets[j] = true_yield(profile, farm.farm_offset, x) +
                      noise.normal(0.0, profile.noise_std);
    }
    return ds;
  };

  return FarmData{make_split(farm.n_train, SeedTag::TrainFeatures, SeedTag::TrainNoise),
                  make_split(farm.n_test, SeedTag::TestFeatures, SeedTag::TestNoise)};
}

void export_dataset_csv(const Dataset& data, const std::string& path) {
  data.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (int c = 0; c < data.dim; ++c) out << 'f' << c << ',';
  out << "y\n";
  for (std::size_t j = 0; j < data.size(); ++j) {
    for (int c = 0; c < data.dim; ++c) out << format_float(data.row(j)[c]) << ',';
    out << format_float(data.targets[j]) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

Dataset import_dataset_csv(const std::string& path, int farm_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  std::stringstream hs(line);
  for (std::string field; std::getline(hs, field, ',');) header.push_back(field);
  if (header.size() < 2 || header.back() != "y")
    throw std::invalid_argument(path + ": header must be f0,...,f{d-1},y");
  const int dim = static_cast<int>(header.size()) - 1;
  for (int c = 0; c < dim; ++c)
    if (header[c] != "f" + std::to_string(c))
      throw std::invalid_argument(path + ": unexpected header column " + header[c]);

  Dataset ds;
  ds.farm_id = farm_id;
  ds.dim = dim;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    std::stringstream ls(line);
    std::string field;
    int col = 0;
    while (std::getline(ls, field, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument(path + ": row " + std::to_string(row) +
                                    " has a non-numeric field");
      }
      if (used != field.size())
        throw std::invalid_argument(path + ": row " + std::to_string(row) +
                                    " has a malformed number");
      if (!std::isfinite(v))
        throw std::invalid_argument(path + ": row " + std::to_string(row) +
                                    " has a non-finite value");
      if (col < dim)
        ds.features.push_back(v);
      else if (col == dim)
        ds.targets.push_back(v);
      ++col;
    }
    if (col != dim + 1)
      throw std::invalid_argument(path + ": row " + std::to_string(row) + " has " +
                                  std::to_string(col) + " fields, expected " +
                                  std::to_string(dim + 1));
  }
  ds.validate();
  return ds;
}

}  // namespace hierfed
