#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hierfed {

// Execution policy for the data-parallel kernels. Both policies produce
// bit-identical results: work is split into fixed-size blocks and the block
// partials are always combined in index order.
enum class ExecPolicy { Serial, OpenMP };

enum class ModelKind { Linear, Mlp };
enum class Activation { ReLU, Tanh };

struct ModelSpec {
  ModelKind kind = ModelKind::Linear;
  int input_dim = 1;
  std::vector<int> hidden_dims{};
  Activation activation = Activation::Tanh;

  bool operator==(const ModelSpec&) const = default;

  int param_count() const;
  // Dense layer shapes from input to the scalar output, Linear included.
  std::vector<std::pair<int, int>> layer_shapes() const;
  void validate() const;
};

// Flat 64-bit parameter vector tied to the spec it parameterizes.
// Layout per layer: row-major weights (out x in), then biases (out).
// Linear is the single layer [w..., b].
struct ParamVector {
  ModelSpec spec;
  std::vector<double> values;

  bool all_finite() const;
  void validate() const;
};

// One farm's private examples, row-major features.
struct Dataset {
  int farm_id = 0;
  int dim = 0;
  std::vector<double> features;  // size() x dim
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  const double* row(std::size_t j) const { return features.data() + j * static_cast<std::size_t>(dim); }
  void validate() const;
};

enum class BatchMode { FullBatch };

struct TrainConfig {
  double learning_rate = 0.05;  // eta
  int epochs = 10;              // E
  BatchMode batch_mode = BatchMode::FullBatch;

  void validate() const;
};

// Non-finite parameters produced during training. Carries the epoch that
// diverged and, when raised inside the federation, farm and round.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& msg, int epoch, int farm_id = -1, int round = -1)
      : std::runtime_error(msg), epoch_(epoch), farm_id_(farm_id), round_(round) {}

  int epoch() const { return epoch_; }
  int farm_id() const { return farm_id_; }
  int round() const { return round_; }

 private:
  int epoch_;
  int farm_id_;
  int round_;
};

// Zeros for Linear; seeded uniform in [-0.5/sqrt(fan_in), +0.5/sqrt(fan_in)]
// per layer with zero biases for Mlp. Deterministic in (spec, seed).
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

double predict(const ParamVector& params, std::span<const double> x);

double mse_loss(const ParamVector& params, const Dataset& data,
                ExecPolicy policy = ExecPolicy::OpenMP);

// Exact analytic full-batch gradient of mse_loss.
ParamVector gradient(const ParamVector& params, const Dataset& data,
                     ExecPolicy policy = ExecPolicy::OpenMP);

// E full-batch steps p <- p - eta * gradient(p, data). Pure: the input is
// copied, never mutated. Throws DivergenceError naming the epoch if any
// parameter goes non-finite.
ParamVector local_update(const ParamVector& cluster_model, const Dataset& data,
                         const TrainConfig& cfg,
                         ExecPolicy policy = ExecPolicy::OpenMP);

}  // namespace hierfed
