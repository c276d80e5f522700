#include "dss/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace dss {

Mlp::Mlp(std::vector<int> layer_sizes, OutputActivation out_act)
    : sizes_(std::move(layer_sizes)), out_act_(out_act) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need >= 2 layer sizes");
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] <= 0 || sizes_[l + 1] <= 0)
      throw std::invalid_argument("Mlp: non-positive layer size");
    n += std::size_t(sizes_[l]) * std::size_t(sizes_[l + 1]) + std::size_t(sizes_[l + 1]);
  }
  params_.assign(n, 0.0);
}

void Mlp::init_uniform(std::mt19937_64& rng) {
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int fan_in = sizes_[l];
    const int fan_out = sizes_[l + 1];
    const double bound = 1.0 / std::sqrt(double(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (int i = 0; i < fan_out * fan_in + fan_out; ++i) params_[off + std::size_t(i)] = dist(rng);
    off += std::size_t(fan_out) * std::size_t(fan_in) + std::size_t(fan_out);
  }
}

std::vector<double> Mlp::forward(const std::vector<double>& input, Cache* cache) const {
  if (int(input.size()) != sizes_.front())
    throw std::invalid_argument("Mlp::forward: input size mismatch");
  if (cache) {
    cache->activations.clear();
    cache->preacts.clear();
    cache->activations.push_back(input);
  }
  std::vector<double> act = input;
  std::size_t off = 0;
  const std::size_t n_layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    std::vector<double> z(std::size_t(out), 0.0);
    for (int j = 0; j < out; ++j) {
      double s = params_[off + std::size_t(out) * std::size_t(in) + std::size_t(j)];  // bias
      const std::size_t row = off + std::size_t(j) * std::size_t(in);
      for (int i = 0; i < in; ++i) s += params_[row + std::size_t(i)] * act[std::size_t(i)];
      z[std::size_t(j)] = s;
    }
    off += std::size_t(out) * std::size_t(in) + std::size_t(out);
    if (cache) cache->preacts.push_back(z);
    const bool last = (l + 1 == n_layers);
    std::vector<double> a(z.size());
    if (!last) {
      for (std::size_t j = 0; j < z.size(); ++j) a[j] = z[j] > 0.0 ? z[j] : 0.0;
    } else if (out_act_ == OutputActivation::sigmoid) {
      for (std::size_t j = 0; j < z.size(); ++j) a[j] = 1.0 / (1.0 + std::exp(-z[j]));
    } else {
      a = z;
    }
    if (cache) cache->activations.push_back(a);
    act = std::move(a);
  }
  return act;
}

void Mlp::backward(const Cache& cache, const std::vector<double>& output_grad,
                   std::vector<double>& param_grad,
                   std::vector<double>* input_grad) const {
  const std::size_t n_layers = sizes_.size() - 1;
  if (cache.activations.size() != n_layers + 1)
    throw std::invalid_argument("Mlp::backward: stale cache");
  if (param_grad.size() != params_.size())
    throw std::invalid_argument("Mlp::backward: param_grad size mismatch");

  // Layer parameter offsets.
  std::vector<std::size_t> offsets(n_layers);
  std::size_t off = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offsets[l] = off;
    off += std::size_t(sizes_[l + 1]) * std::size_t(sizes_[l]) + std::size_t(sizes_[l + 1]);
  }

  std::vector<double> delta = output_grad;  // dL/da at current layer output
  for (std::size_t l = n_layers; l-- > 0;) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const bool last = (l + 1 == n_layers);
    // dL/dz
    std::vector<double> dz(std::size_t(out), 0.0);
    for (int j = 0; j < out; ++j) {
      const double z = cache.preacts[l][std::size_t(j)];
      double g = delta[std::size_t(j)];
      if (!last) {
        g *= z > 0.0 ? 1.0 : 0.0;
      } else if (out_act_ == OutputActivation::sigmoid) {
        const double s = cache.activations[l + 1][std::size_t(j)];
        g *= s * (1.0 - s);
      }
      dz[std::size_t(j)] = g;
    }
    const auto& a_in = cache.activations[l];
    const std::size_t base = offsets[l];
    for (int j = 0; j < out; ++j) {
      const std::size_t row = base + std::size_t(j) * std::size_t(in);
      for (int i = 0; i < in; ++i)
        param_grad[row + std::size_t(i)] += dz[std::size_t(j)] * a_in[std::size_t(i)];
      param_grad[base + std::size_t(out) * std::size_t(in) + std::size_t(j)] +=
          dz[std::size_t(j)];
    }
    if (l > 0 || input_grad) {
      std::vector<double> da(std::size_t(in), 0.0);
      for (int j = 0; j < out; ++j) {
        const std::size_t row = base + std::size_t(j) * std::size_t(in);
        for (int i = 0; i < in; ++i)
          da[std::size_t(i)] += dz[std::size_t(j)] * params_[row + std::size_t(i)];
      }
      if (l == 0) {
        if (input_grad) *input_grad = std::move(da);
      } else {
        delta = std::move(da);
      }
    }
  }
}

bool Mlp::finite() const {
  for (double p : params_)
    if (!std::isfinite(p)) return false;
  return true;
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw std::invalid_argument("Adam::step: size mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, double(t_));
  const double bc2 = 1.0 - std::pow(beta2_, double(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
}

void soft_update(std::vector<double>& target, const std::vector<double>& online,
                 double tau) {
  if (target.size() != online.size())
    throw std::invalid_argument("soft_update: size mismatch");
  for (std::size_t i = 0; i < target.size(); ++i)
    target[i] = tau * online[i] + (1.0 - tau) * target[i];
}

}  // namespace dss
