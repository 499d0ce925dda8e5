#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hierfed/model.hpp"

namespace hierfed {

// One crop type's ground-truth response: linear part plus an optional fixed
// sinusoidal interaction term.
struct CropProfile {
  int crop_id = 0;
  double base_yield = 0.0;
  std::vector<double> weight_vector;
  double nonlinearity_scale = 0.0;
  double noise_std = 0.0;
};

struct FarmProfile {
  int farm_id = 0;
  int crop_id = 0;
  double farm_offset = 0.0;
  std::size_t n_train = 1;
  std::size_t n_test = 1;
};

struct GeneratorConfig {
  int dim = 1;    // d
  int num_crops = 1;  // K
  std::vector<CropProfile> profiles;  // one per crop, distinct crop_ids
  std::vector<double> feature_low;    // per-dimension bounds, size d
  std::vector<double> feature_high;
  double farm_offset_std = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  const CropProfile& profile_for(int crop_id) const;
};

// Seeded profiles with weight vectors drawn uniform in [-1,1]^d, rescaled
// (with deterministic retry sub-seeds) until every pairwise L2 distance is
// at least `heterogeneity`. Throws after 1000 failed attempts.
std::vector<CropProfile> make_crop_profiles(int dim, int num_crops, double heterogeneity,
                                            std::uint64_t seed);

// Noiseless ground truth:
// base + w.x + scale * sin(x[0] * x[min(1, d-1)]) + farm_offset.
double true_yield(const CropProfile& profile, double farm_offset, std::span<const double> x);

// Deterministic normal farm bias from (seed, farm_id); used when building
// FarmProfiles.
double farm_offset_for(const GeneratorConfig& gen, int farm_id);

struct FarmData {
  Dataset train;
  Dataset test;
};

// Features uniform within the per-dimension bounds, targets true_yield plus
// Gaussian noise. Train/test and feature/noise draw from disjoint sub-seed
// streams keyed on (seed, farm_id, tag), so farms never perturb each other.
FarmData generate_farm_dataset(const GeneratorConfig& gen, const FarmProfile& farm);

// CSV schema: header "f0,...,f{d-1},y", one row per example, '.' decimals.
void export_dataset_csv(const Dataset& data, const std::string& path);
Dataset import_dataset_csv(const std::string& path, int farm_id = 0);

}  // namespace hierfed
