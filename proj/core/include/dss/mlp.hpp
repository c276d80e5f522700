#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dss {

enum class OutputActivation { linear, sigmoid };

/// Fully connected network with ReLU hidden layers, double precision, packed
/// parameters (per layer: row-major weight matrix then bias). Forward caches
/// activations so backward can produce gradients w.r.t. parameters and,
/// optionally, the input.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> layer_sizes, OutputActivation out_act);

  void init_uniform(std::mt19937_64& rng);  // U(-1/sqrt(fan_in), 1/sqrt(fan_in))

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  OutputActivation output_activation() const { return out_act_; }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  struct Cache {
    std::vector<std::vector<double>> activations;  // per layer incl. input
    std::vector<std::vector<double>> preacts;      // per layer, before activation
  };

  std::vector<double> forward(const std::vector<double>& input, Cache* cache = nullptr) const;

  /// Backpropagate dL/dy through the cached pass. Accumulates parameter
  /// gradients into param_grad (must be params().size(), pre-zeroed by the
  /// caller for a fresh gradient). Writes dL/dx into input_grad if non-null.
  void backward(const Cache& cache, const std::vector<double>& output_grad,
                std::vector<double>& param_grad,
                std::vector<double>* input_grad = nullptr) const;

  bool finite() const;

 private:
  std::vector<int> sizes_;
  OutputActivation out_act_ = OutputActivation::linear;
  std::vector<double> params_;
};

/// Adam optimizer state for one parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step(std::vector<double>& params, const std::vector<double>& grad);
  double learning_rate() const { return lr_; }

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::int64_t t_ = 0;
  std::vector<double> m_, v_;
};

/// target <- tau*online + (1-tau)*target, elementwise.
void soft_update(std::vector<double>& target, const std::vector<double>& online,
                 double tau);

}  // namespace dss
