#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pml/errors.hpp"
#include "pml/grid.hpp"
#include "pml/io.hpp"
#include "pml/random.hpp"

namespace pml {

enum class Arch { Linear, Mlp1 };

inline const char* to_string(Arch a) { return a == Arch::Linear ? "linear" : "mlp1"; }

struct ModelConfig {
  Arch arch = Arch::Linear;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::size_t hidden_dim = 0;  // Mlp1 only
  std::uint64_t init_seed = 0;
  double init_scale = 1.0;  // bound multiplier on top of 1/sqrt(fan_in)

  void validate() const {
    if (input_dim == 0) throw ValidationError("ModelConfig.input_dim: must be positive");
    if (output_dim == 0) throw ValidationError("ModelConfig.output_dim: must be positive");
    if (arch == Arch::Mlp1 && hidden_dim == 0)
      throw ValidationError("ModelConfig.hidden_dim: must be positive for mlp1");
    if (!(init_scale > 0.0) || !std::isfinite(init_scale))
      throw ValidationError("ModelConfig.init_scale: must be finite and > 0");
  }

  // Equality is structural (arch + dims); init settings do not survive a
  // checkpoint round-trip and are deliberately excluded.
  friend bool operator==(const ModelConfig& a, const ModelConfig& b) {
    return a.arch == b.arch && a.input_dim == b.input_dim && a.output_dim == b.output_dim &&
           a.hidden_dim == b.hidden_dim;
  }
};

/// Parameters of the classifier head. Linear uses only the output layer
/// (weight L x M); Mlp1 inserts a tanh hidden layer (H x M, then L x H).
struct ModelParams {
  ModelConfig config;
  Matrix hidden_weight;              // H x M (Mlp1 only)
  std::vector<double> hidden_bias;   // H
  Matrix output_weight;              // L x M or L x H
  std::vector<double> output_bias;   // L

  static ModelParams zeros(const ModelConfig& cfg) {
    cfg.validate();
    ModelParams p;
    p.config = cfg;
    if (cfg.arch == Arch::Mlp1) {
      p.hidden_weight = Matrix(cfg.hidden_dim, cfg.input_dim, 0.0);
      p.hidden_bias.assign(cfg.hidden_dim, 0.0);
      p.output_weight = Matrix(cfg.output_dim, cfg.hidden_dim, 0.0);
    } else {
      p.output_weight = Matrix(cfg.output_dim, cfg.input_dim, 0.0);
    }
    p.output_bias.assign(cfg.output_dim, 0.0);
    return p;
  }

  /// Uniform init in +-init_scale/sqrt(fan_in), biases zero.
  static ModelParams random_init(const ModelConfig& cfg) {
    ModelParams p = zeros(cfg);
    Rng rng(cfg.init_seed);
    auto init = [&rng](Matrix& w) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
      for (double& v : w.flat()) v = rng.uniform(-bound, bound);
    };
    if (cfg.arch == Arch::Mlp1) init(p.hidden_weight);
    init(p.output_weight);
    if (cfg.init_scale != 1.0) {
      for (double& v : p.hidden_weight.flat()) v *= cfg.init_scale;
      for (double& v : p.output_weight.flat()) v *= cfg.init_scale;
    }
    return p;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

struct Forward {
  Matrix logits;       // B x L
  Matrix predictions;  // B x L, sigmoid(logits)
  Matrix hidden;       // B x H (Mlp1 only), tanh activations
};

inline Forward forward(const ModelParams& params, const Matrix& features) {
  const ModelConfig& cfg = params.config;
  if (features.cols() != cfg.input_dim)
    throw StructuralError("forward: feature dimension does not match model input_dim");
  for (double v : features.flat())
    if (!std::isfinite(v)) throw NumericError("forward: non-finite feature");

  const std::size_t b = features.rows();
  Forward out;
  const Matrix* layer_in = &features;
  if (cfg.arch == Arch::Mlp1) {
    out.hidden = Matrix(b, cfg.hidden_dim);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t h = 0; h < cfg.hidden_dim; ++h) {
        double s = params.hidden_bias[h];
        for (std::size_t f = 0; f < cfg.input_dim; ++f)
          s += params.hidden_weight(h, f) * features(i, f);
        out.hidden(i, h) = std::tanh(s);
      }
    layer_in = &out.hidden;
  }
  out.logits = Matrix(b, cfg.output_dim);
  out.predictions = Matrix(b, cfg.output_dim);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < cfg.output_dim; ++j) {
      double s = params.output_bias[j];
      for (std::size_t k = 0; k < layer_in->cols(); ++k) s += params.output_weight(j, k) * (*layer_in)(i, k);
      out.logits(i, j) = s;
      out.predictions(i, j) = sigmoid(s);
    }
  return out;
}

struct ParamGrads {
  Matrix hidden_weight;
  std::vector<double> hidden_bias;
  Matrix output_weight;
  std::vector<double> output_bias;
};

/// Backpropagates an upstream d(loss)/d(logits) into parameter gradients.
/// The batch mean lives in the loss, so these are plain sums over instances.
inline ParamGrads backward(const ModelParams& params, const Matrix& features, const Forward& cache,
                           const Matrix& grad_logits) {
  const ModelConfig& cfg = params.config;
  if (grad_logits.rows() != features.rows() || grad_logits.cols() != cfg.output_dim)
    throw StructuralError("backward: grad_logits shape does not match batch/output dims");
  for (double v : grad_logits.flat())
    if (!std::isfinite(v)) throw NumericError("backward: non-finite upstream gradient");

  const std::size_t b = features.rows();
  ParamGrads g;
  g.output_bias.assign(cfg.output_dim, 0.0);
  const Matrix& layer_in = cfg.arch == Arch::Mlp1 ? cache.hidden : features;
  g.output_weight = Matrix(cfg.output_dim, layer_in.cols(), 0.0);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < cfg.output_dim; ++j) {
      const double gij = grad_logits(i, j);
      g.output_bias[j] += gij;
      for (std::size_t k = 0; k < layer_in.cols(); ++k) g.output_weight(j, k) += gij * layer_in(i, k);
    }

  if (cfg.arch == Arch::Mlp1) {
    g.hidden_weight = Matrix(cfg.hidden_dim, cfg.input_dim, 0.0);
    g.hidden_bias.assign(cfg.hidden_dim, 0.0);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t h = 0; h < cfg.hidden_dim; ++h) {
        double up = 0.0;
        for (std::size_t j = 0; j < cfg.output_dim; ++j)
          up += grad_logits(i, j) * params.output_weight(j, h);
        const double a = cache.hidden(i, h);
        up *= 1.0 - a * a;  // tanh'
        g.hidden_bias[h] += up;
        for (std::size_t f = 0; f < cfg.input_dim; ++f) g.hidden_weight(h, f) += up * features(i, f);
      }
  }
  return g;
}

/// Momentum buffers; shapes are created lazily on the first step.
struct SgdState {
  Matrix hidden_weight;
  std::vector<double> hidden_bias;
  Matrix output_weight;
  std::vector<double> output_bias;
  bool initialized = false;
};

/// Classic momentum update: v <- momentum * v + g, param <- param - lr * v.
inline void sgd_step(ModelParams& params, const ParamGrads& grads, double lr, double momentum,
                     SgdState& state) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ValidationError("sgd_step.lr: must be finite and >= 0");
  if (!(momentum >= 0.0) || momentum >= 1.0) throw ValidationError("sgd_step.momentum: must be in [0, 1)");
  auto check = [](std::span<const double> vs) {
    for (double v : vs)
      if (!std::isfinite(v)) throw NumericError("sgd_step: non-finite gradient");
  };
  check(grads.output_weight.flat());
  check(grads.output_bias);
  check(grads.hidden_weight.flat());
  check(grads.hidden_bias);

  if (!state.initialized) {
    state.hidden_weight = Matrix(grads.hidden_weight.rows(), grads.hidden_weight.cols(), 0.0);
    state.hidden_bias.assign(grads.hidden_bias.size(), 0.0);
    state.output_weight = Matrix(grads.output_weight.rows(), grads.output_weight.cols(), 0.0);
    state.output_bias.assign(grads.output_bias.size(), 0.0);
    state.initialized = true;
  }
  auto apply = [lr, momentum](std::span<double> p, std::span<const double> g, std::span<double> v) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      v[k] = momentum * v[k] + g[k];
      p[k] -= lr * v[k];
    }
  };
  apply(params.output_weight.flat(), grads.output_weight.flat(), state.output_weight.flat());
  apply(params.output_bias, grads.output_bias, state.output_bias);
  if (params.config.arch == Arch::Mlp1) {
    apply(params.hidden_weight.flat(), grads.hidden_weight.flat(), state.hidden_weight.flat());
    apply(params.hidden_bias, grads.hidden_bias, state.hidden_bias);
  }
}

/// Checkpoint text format: a header line ("linear M L" or "mlp1 M H L")
/// followed by one row of decimals per weight-matrix row and one per bias.
inline void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("save_checkpoint: cannot open '" + path.string() + "' for writing");
  const ModelConfig& cfg = params.config;
  out << to_string(cfg.arch) << ' ' << cfg.input_dim;
  if (cfg.arch == Arch::Mlp1) out << ' ' << cfg.hidden_dim;
  out << ' ' << cfg.output_dim << '\n';
  auto write_row = [&out](std::span<const double> row) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? " " : "") << format_double(row[k]);
    out << '\n';
  };
  if (cfg.arch == Arch::Mlp1) {
    for (std::size_t i = 0; i < params.hidden_weight.rows(); ++i) write_row(params.hidden_weight.row(i));
    write_row(params.hidden_bias);
  }
  for (std::size_t i = 0; i < params.output_weight.rows(); ++i) write_row(params.output_weight.row(i));
  write_row(params.output_bias);
  if (!out) throw ParseError("save_checkpoint: write failed for '" + path.string() + "'");
}

inline ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_checkpoint: cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": line 1: missing header");
  std::istringstream header(line);
  std::string arch;
  header >> arch;
  ModelConfig cfg;
  if (arch == "linear") {
    cfg.arch = Arch::Linear;
    if (!(header >> cfg.input_dim >> cfg.output_dim))
      throw ParseError(path.string() + ": line 1: expected 'linear M L'");
  } else if (arch == "mlp1") {
    cfg.arch = Arch::Mlp1;
    if (!(header >> cfg.input_dim >> cfg.hidden_dim >> cfg.output_dim))
      throw ParseError(path.string() + ": line 1: expected 'mlp1 M H L'");
  } else {
    throw ParseError(path.string() + ": line 1: unknown architecture '" + arch + "'");
  }

  ModelParams params = ModelParams::zeros(cfg);
  std::size_t line_no = 1;
  auto read_row = [&](std::span<double> row) {
    ++line_no;
    const std::string where = path.string() + ": line " + std::to_string(line_no);
    if (!std::getline(in, line)) throw StructuralError(where + ": checkpoint body ended early");
    std::istringstream ss(line);
    std::string token;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!(ss >> token)) throw StructuralError(where + ": expected " + std::to_string(row.size()) + " values");
      row[k] = parse_double(token, where);
    }
    if (ss >> token) throw StructuralError(where + ": trailing values");
  };
  if (cfg.arch == Arch::Mlp1) {
    for (std::size_t i = 0; i < params.hidden_weight.rows(); ++i) read_row(params.hidden_weight.row(i));
    read_row(params.hidden_bias);
  }
  for (std::size_t i = 0; i < params.output_weight.rows(); ++i) read_row(params.output_weight.row(i));
  read_row(params.output_bias);
  return params;
}

}  // namespace pml
