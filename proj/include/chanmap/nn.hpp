// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "chanmap/types.hpp"

namespace chanmap {

struct TrainHParams {
  double lr = 1e-2;
  int epochs = 500;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  int batch_size = 64;
};

/// Per-feature standardization fit on training rows. A constant feature keeps
/// scale 1 so transformed values stay finite.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> scale;

  static Scaler fit(const std::vector<std::vector<double>>& rows);
  std::vector<double> transform(std::span<const double> x) const;
  std::size_t n_features() const { return mean.size(); }
};

/// Multinomial logistic regression trained by full-batch gradient descent on
/// cross-entropy with L2 on the weights. On a loss increase the step is
/// rolled back and the learning rate halved, so the recorded loss history is
/// non-increasing. Deterministic (zero initialization, convex objective).
struct LogisticModel {
  int n_classes = 0;
  int n_features = 0;
  Scaler scaler;
  std::vector<double> weights;  // n_classes x n_features, row-major
  std::vector<double> bias;     // n_classes
  bool degenerate = false;      // fewer than two classes in the training rows
  std::vector<double> degenerate_probs;
  std::vector<double> loss_history;

  std::vector<double> predict_proba(std::span<const double> x) const;

  static LogisticModel train(const std::vector<std::vector<double>>& X,
                             const std::vector<int>& y, int n_classes,
                             const TrainHParams& hp);
};

/// Cross-entropy (+ L2 on weights) and its analytic gradient for standardized
/// inputs; the finite-difference checks in the tests drive this directly.
double logistic_loss_grad(const std::vector<std::vector<double>>& X_std,
                          const std::vector<int>& y, int n_classes, double l2,
                          std::span<const double> weights, std::span<const double> bias,
                          std::vector<double>& grad_w, std::vector<double>& grad_b);

/// Fully connected network with softplus hidden layers and a linear 2-unit
/// output head (mean, log-variance). Parameters are stored flattened for the
/// gradient checks.
class Mlp {
public:
  Mlp() = default;
  /// dims = {n_in, hidden..., 2}; seeded uniform init scaled by fan-in.
  static Mlp init(const std::vector<int>& dims, std::uint64_t seed);

  const std::vector<int>& dims() const { return dims_; }
  std::size_t n_params() const { return params_.size(); }
  const std::vector<double>& params() const { return params_; }
  void set_params(std::vector<double> p);

  /// Forward pass; returns {mean_raw, logvar_raw}.
  std::array<double, 2> forward(std::span<const double> x) const;

  /// Mean Gaussian NLL 0.5*(logv + (y-mu)^2/exp(logv)) over the batch, with
  /// mu = t_mean + t_scale*out0 and logv = clamp(out1 + 2*ln t_scale,
  /// logv_lo, logv_hi), plus (l2/2)*|W|^2. Fills the parameter gradient.
  double nll_loss_grad(const std::vector<std::vector<double>>& X_std,
                       std::span<const double> targets, double t_mean, double t_scale,
                       double logv_lo, double logv_hi, double l2,
                       std::vector<double>& grad) const;
  double nll_loss(const std::vector<std::vector<double>>& X_std,
                  std::span<const double> targets, double t_mean, double t_scale,
                  double logv_lo, double logv_hi, double l2) const;

private:
  std::vector<int> dims_;
  std::vector<double> params_;  // per layer: weights (out x in) then bias

  struct LayerView {
    const double* w;
    const double* b;
    int in, out;
  };
  LayerView layer(int i) const;
};

/// Mini-batch SGD on the Gaussian NLL; deterministic per seed. Returns the
/// recorded full-data loss before training and after each epoch.
std::vector<double> train_mlp_nll(Mlp& net, const std::vector<std::vector<double>>& X_std,
                                  std::span<const double> targets, double t_mean,
                                  double t_scale, double logv_lo, double logv_hi,
                                  const TrainHParams& hp);

}  // namespace chanmap
