#include "hierfed/model.hpp"

#include <cmath>
#include <cstddef>

#include "hierfed/rng.hpp"

namespace hierfed {

namespace {

// Examples per accumulation block. Block partials are combined in index
// order, so serial and OpenMP execution produce the same bits.
constexpr std::size_t kBlock = 256;

double activate(Activation act, double z) {
  return act == Activation::ReLU ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

double activate_grad(Activation act, double z, double a) {
  return act == Activation::ReLU ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - a * a;
}

// Scratch for one MLP forward/backward sweep; reused across the examples of
// a block.
struct MlpScratch {
  std::vector<std::vector<double>> pre;   // z per layer
  std::vector<std::vector<double>> act;   // a per layer (act[0] unused, input aliased)
  std::vector<std::vector<double>> delta;

  explicit MlpScratch(const std::vector<std::pair<int, int>>& shapes) {
    pre.resize(shapes.size());
    act.resize(shapes.size());
    delta.resize(shapes.size());
    for (std::size_t l = 0; l < shapes.size(); ++l) {
      pre[l].resize(shapes[l].second);
      act[l].resize(shapes[l].second);
      delta[l].resize(shapes[l].second);
    }
  }
};

// Forward pass through all layers; returns the scalar output. x has
// input_dim entries; shapes[l] = (in, out) of layer l.
double mlp_forward(const std::vector<std::pair<int, int>>& shapes, Activation act,
                   const double* params, const double* x, MlpScratch& s) {
  const double* input = x;
  std::size_t off = 0;
  const std::size_t last = shapes.size() - 1;
  for (std::size_t l = 0; l <= last; ++l) {
    const auto [in, out] = shapes[l];
    const double* w = params + off;
    const double* b = params + off + static_cast<std::size_t>(in) * out;
    for (int o = 0; o < out; ++o) {
      double z = b[o];
      const double* wrow = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) z += wrow[i] * input[i];
      s.pre[l][o] = z;
      s.act[l][o] = (l == last) ? z : activate(act, z);  // linear output layer
    }
    input = s.act[l].data();
    off += static_cast<std::size_t>(in + 1) * out;
  }
  return s.act[last][0];
}

// Accumulates sum over [begin, end) of d/dtheta (yhat_j - y_j)^2 into grad.
void mlp_grad_block(const ModelSpec& spec, const double* params, const Dataset& data,
                    std::size_t begin, std::size_t end, double* grad) {
  const auto shapes = spec.layer_shapes();
  const Activation act = spec.activation;
  MlpScratch s(shapes);
  const std::size_t last = shapes.size() - 1;
  for (std::size_t j = begin; j < end; ++j) {
    const double* x = data.row(j);
    const double yhat = mlp_forward(shapes, act, params, x, s);
    s.delta[last][0] = 2.0 * (yhat - data.targets[j]);
    // walk layers backwards, accumulating weight/bias grads
    std::size_t off_end = 0;
    for (const auto& [in, out] : shapes) off_end += static_cast<std::size_t>(in + 1) * out;
    std::size_t off = off_end;
    for (std::size_t l = last + 1; l-- > 0;) {
      const auto [in, out] = shapes[l];
      off -= static_cast<std::size_t>(in + 1) * out;
      const double* w = params + off;
      double* gw = grad + off;
      double* gb = grad + off + static_cast<std::size_t>(in) * out;
      const double* input = (l == 0) ? x : s.act[l - 1].data();
      for (int o = 0; o < out; ++o) {
        const double d = s.delta[l][o];
        double* gwrow = gw + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) gwrow[i] += d * input[i];
        gb[o] += d;
      }
      if (l > 0) {
        const int pin = in;
        for (int i = 0; i < pin; ++i) {
          double acc = 0.0;
          for (int o = 0; o < out; ++o)
            acc += w[static_cast<std::size_t>(o) * in + i] * s.delta[l][o];
          s.delta[l - 1][i] = acc * activate_grad(act, s.pre[l - 1][i], s.act[l - 1][i]);
        }
      }
    }
  }
}

void linear_grad_block(const ModelSpec& spec, const double* params, const Dataset& data,
                       std::size_t begin, std::size_t end, double* grad) {
  const int d = spec.input_dim;
  for (std::size_t j = begin; j < end; ++j) {
    const double* x = data.row(j);
    double r = params[d];
    for (int c = 0; c < d; ++c) r += params[c] * x[c];
    r = 2.0 * (r - data.targets[j]);
    for (int c = 0; c < d; ++c) grad[c] += r * x[c];
    grad[d] += r;
  }
}

double sse_block(const ModelSpec& spec, const double* params, const Dataset& data,
                 std::size_t begin, std::size_t end) {
  double sse = 0.0;
  if (spec.kind == ModelKind::Linear) {
    const int d = spec.input_dim;
    for (std::size_t j = begin; j < end; ++j) {
      const double* x = data.row(j);
      double r = params[d];
      for (int c = 0; c < d; ++c) r += params[c] * x[c];
      r -= data.targets[j];
      sse += r * r;
    }
  } else {
    const auto shapes = spec.layer_shapes();
    MlpScratch s(shapes);
    for (std::size_t j = begin; j < end; ++j) {
      const double r = mlp_forward(shapes, spec.activation, params, data.row(j), s) -
                       data.targets[j];
      sse += r * r;
    }
  }
  return sse;
}

void check_pair(const ParamVector& params, const Dataset& data) {
  params.spec.validate();
  if (params.values.size() != static_cast<std::size_t>(params.spec.param_count()))
    throw std::invalid_argument("param vector length does not match spec");
  if (data.size() == 0) throw std::invalid_argument("empty dataset");
  if (data.dim != params.spec.input_dim)
    throw std::invalid_argument("dataset width " + std::to_string(data.dim) +
                                " does not match model input_dim " +
                                std::to_string(params.spec.input_dim));
}

}  // namespace

int ModelSpec::param_count() const {
  int count = 0;
  for (const auto& [in, out] : layer_shapes()) count += (in + 1) * out;
  return count;
}

std::vector<std::pair<int, int>> ModelSpec::layer_shapes() const {
  std::vector<std::pair<int, int>> shapes;
  int in = input_dim;
  if (kind == ModelKind::Mlp) {
    for (int h : hidden_dims) {
      shapes.emplace_back(in, h);
      in = h;
    }
  }
  shapes.emplace_back(in, 1);
  return shapes;
}

void ModelSpec::validate() const {
  if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  if (kind == ModelKind::Linear && !hidden_dims.empty())
    throw std::invalid_argument("Linear model must have empty hidden_dims");
  for (int h : hidden_dims)
    if (h < 1) throw std::invalid_argument("hidden layer width must be >= 1");
}

bool ParamVector::all_finite() const {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

void ParamVector::validate() const {
  spec.validate();
  if (values.size() != static_cast<std::size_t>(spec.param_count()))
    throw std::invalid_argument("param vector length does not match spec");
  if (!all_finite()) throw std::invalid_argument("param vector has non-finite entries");
}

void Dataset::validate() const {
  if (dim < 1) throw std::invalid_argument("dataset dim must be >= 1");
  if (targets.empty()) throw std::invalid_argument("dataset must have at least one example");
  if (features.size() != targets.size() * static_cast<std::size_t>(dim))
    throw std::invalid_argument("feature matrix size does not match n x dim");
  for (double v : features)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
  for (double v : targets)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite target value");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  ParamVector p{spec, std::vector<double>(static_cast<std::size_t>(spec.param_count()), 0.0)};
  if (spec.kind == ModelKind::Linear) return p;  // zeros, seed unused
  SplitMix64 rng(derive_seed(seed, SeedTag::ModelInit));
  std::size_t off = 0;
  for (const auto& [in, out] : spec.layer_shapes()) {
    const double bound = 0.5 / std::sqrt(static_cast<double>(in));
    const std::size_t nw = static_cast<std::size_t>(in) * out;
    for (std::size_t i = 0; i < nw; ++i) p.values[off + i] = rng.uniform(-bound, bound);
    off += nw + out;  // biases stay zero
  }
  return p;
}

double predict(const ParamVector& params, std::span<const double> x) {
  params.spec.validate();
  if (x.size() != static_cast<std::size_t>(params.spec.input_dim))
    throw std::invalid_argument("feature vector length does not match input_dim");
  if (params.spec.kind == ModelKind::Linear) {
    const int d = params.spec.input_dim;
    double y = params.values[d];
    for (int c = 0; c < d; ++c) y += params.values[c] * x[c];
    return y;
  }
  const auto shapes = params.spec.layer_shapes();
  MlpScratch s(shapes);
  return mlp_forward(shapes, params.spec.activation, params.values.data(), x.data(), s);
}

double mse_loss(const ParamVector& params, const Dataset& data, ExecPolicy policy) {
  check_pair(params, data);
  const std::size_t n = data.size();
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks, 0.0);
  const double* pv = params.values.data();
  if (policy == ExecPolicy::OpenMP) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t blk = 0; blk < static_cast<std::ptrdiff_t>(nblocks); ++blk) {
      const std::size_t b = static_cast<std::size_t>(blk) * kBlock;
      partial[blk] = sse_block(params.spec, pv, data, b, std::min(b + kBlock, n));
    }
  } else {
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
      const std::size_t b = blk * kBlock;
      partial[blk] = sse_block(params.spec, pv, data, b, std::min(b + kBlock, n));
    }
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total / static_cast<double>(n);
}

ParamVector gradient(const ParamVector& params, const Dataset& data, ExecPolicy policy) {
  check_pair(params, data);
  const std::size_t n = data.size();
  const std::size_t np = params.values.size();
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks * np, 0.0);
  const double* pv = params.values.data();

  auto run_block = [&](std::size_t blk) {
    const std::size_t b = blk * kBlock;
    const std::size_t e = std::min(b + kBlock, n);
    double* g = partial.data() + blk * np;
    if (params.spec.kind == ModelKind::Linear)
      linear_grad_block(params.spec, pv, data, b, e, g);
    else
      mlp_grad_block(params.spec, pv, data, b, e, g);
  };

  if (policy == ExecPolicy::OpenMP) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t blk = 0; blk < static_cast<std::ptrdiff_t>(nblocks); ++blk)
      run_block(static_cast<std::size_t>(blk));
  } else {
    for (std::size_t blk = 0; blk < nblocks; ++blk) run_block(blk);
  }

  ParamVector grad{params.spec, std::vector<double>(np, 0.0)};
  for (std::size_t blk = 0; blk < nblocks; ++blk) {
    const double* g = partial.data() + blk * np;
    for (std::size_t c = 0; c < np; ++c) grad.values[c] += g[c];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t c = 0; c < np; ++c) grad.values[c] *= inv_n;
  return grad;
}

ParamVector local_update(const ParamVector& cluster_model, const Dataset& data,
                         const TrainConfig& cfg, ExecPolicy policy) {
  check_pair(cluster_model, data);
  ParamVector p = cluster_model;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const ParamVector g = gradient(p, data, policy);
    for (std::size_t c = 0; c < p.values.size(); ++c)
      p.values[c] -= cfg.learning_rate * g.values[c];
    if (!p.all_finite())
      throw DivergenceError("non-finite parameters after epoch " + std::to_string(epoch),
                            epoch);
  }
  return p;
}

}  // namespace hierfed
