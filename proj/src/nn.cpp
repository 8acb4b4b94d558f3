// SPDX-License-Identifier: Apache-2.0
#include "chanmap/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace chanmap {

namespace {

double softplus(double z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Scaler Scaler::fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw EmptyDataset("Scaler::fit: no rows");
  const std::size_t F = rows[0].size();
  Scaler s;
  s.mean.assign(F, 0.0);
  s.scale.assign(F, 1.0);
  for (const auto& r : rows)
    for (std::size_t f = 0; f < F; ++f) s.mean[f] += r[f];
  for (std::size_t f = 0; f < F; ++f) s.mean[f] /= rows.size();
  std::vector<double> var(F, 0.0);
  for (const auto& r : rows)
    for (std::size_t f = 0; f < F; ++f) {
      const double d = r[f] - s.mean[f];
      var[f] += d * d;
    }
  for (std::size_t f = 0; f < F; ++f) {
    const double sd = std::sqrt(var[f] / rows.size());
    s.scale[f] = sd > 1e-9 ? sd : 1.0;
  }
  return s;
}

std::vector<double> Scaler::transform(std::span<const double> x) const {
  std::vector<double> out(x.size());
  for (std::size_t f = 0; f < x.size(); ++f) out[f] = (x[f] - mean[f]) / scale[f];
  return out;
}

double logistic_loss_grad(const std::vector<std::vector<double>>& X_std,
                          const std::vector<int>& y, int n_classes, double l2,
                          std::span<const double> weights, std::span<const double> bias,
                          std::vector<double>& grad_w, std::vector<double>& grad_b) {
  const std::size_t N = X_std.size();
  const std::size_t F = X_std.empty() ? 0 : X_std[0].size();
  grad_w.assign(weights.size(), 0.0);
  grad_b.assign(bias.size(), 0.0);
  double loss = 0.0;
  std::vector<double> logits(n_classes), probs(n_classes);
  for (std::size_t n = 0; n < N; ++n) {
    const auto& x = X_std[n];
    double zmax = -1e300;
    for (int k = 0; k < n_classes; ++k) {
      double z = bias[k];
      for (std::size_t f = 0; f < F; ++f) z += weights[k * F + f] * x[f];
      logits[k] = z;
      zmax = std::max(zmax, z);
    }
    double denom = 0.0;
    for (int k = 0; k < n_classes; ++k) denom += std::exp(logits[k] - zmax);
    const double log_denom = std::log(denom) + zmax;
    loss -= logits[y[n]] - log_denom;
    for (int k = 0; k < n_classes; ++k) {
      probs[k] = std::exp(logits[k] - log_denom);
      const double coeff = probs[k] - (y[n] == k ? 1.0 : 0.0);
      grad_b[k] += coeff;
      for (std::size_t f = 0; f < F; ++f) grad_w[k * F + f] += coeff * x[f];
    }
  }
  loss /= N;
  for (auto& g : grad_w) g /= N;
  for (auto& g : grad_b) g /= N;
  double reg = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    reg += weights[i] * weights[i];
    grad_w[i] += l2 * weights[i];
  }
  return loss + 0.5 * l2 * reg;
}

std::vector<double> LogisticModel::predict_proba(std::span<const double> x) const {
  if (degenerate) return degenerate_probs;
  const std::vector<double> xs = scaler.transform(x);
  std::vector<double> logits(n_classes);
  double zmax = -1e300;
  for (int k = 0; k < n_classes; ++k) {
    double z = bias[k];
    for (int f = 0; f < n_features; ++f) z += weights[k * n_features + f] * xs[f];
    logits[k] = z;
    zmax = std::max(zmax, z);
  }
  double denom = 0.0;
  for (double& z : logits) {
    z = std::exp(z - zmax);
    denom += z;
  }
  for (double& z : logits) z /= denom;
  return logits;
}

LogisticModel LogisticModel::train(const std::vector<std::vector<double>>& X,
                                   const std::vector<int>& y, int n_classes,
                                   const TrainHParams& hp) {
  if (X.empty()) throw EmptyDataset("LogisticModel::train: no rows");
  if (X.size() != y.size())
    throw DimensionMismatch("LogisticModel::train: X and y sizes differ");

  LogisticModel m;
  m.n_classes = n_classes;
  m.n_features = static_cast<int>(X[0].size());

  std::vector<std::size_t> counts(n_classes, 0);
  for (int label : y) {
    if (label < 0 || label >= n_classes)
      throw InvalidParams("LogisticModel::train: label out of range");
    ++counts[label];
  }
  const int distinct = static_cast<int>(std::count_if(counts.begin(), counts.end(),
                                                      [](std::size_t c) { return c > 0; }));
  if (distinct < 2) {
    m.degenerate = true;
    m.degenerate_probs.assign(n_classes, 0.0);
    for (int k = 0; k < n_classes; ++k)
      m.degenerate_probs[k] = static_cast<double>(counts[k]) / y.size();
    return m;
  }

  m.scaler = Scaler::fit(X);
  std::vector<std::vector<double>> Xs(X.size());
  for (std::size_t n = 0; n < X.size(); ++n) Xs[n] = m.scaler.transform(X[n]);

  m.weights.assign(static_cast<std::size_t>(n_classes) * m.n_features, 0.0);
  m.bias.assign(n_classes, 0.0);

  std::vector<double> gw, gb;
  double loss = logistic_loss_grad(Xs, y, n_classes, hp.l2, m.weights, m.bias, gw, gb);
  m.loss_history.push_back(loss);
  double lr = hp.lr;
  std::vector<double> w_try, b_try, gw2, gb2;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    bool accepted = false;
    while (lr > 1e-14) {
      w_try = m.weights;
      b_try = m.bias;
      for (std::size_t i = 0; i < w_try.size(); ++i) w_try[i] -= lr * gw[i];
      for (std::size_t i = 0; i < b_try.size(); ++i) b_try[i] -= lr * gb[i];
      const double loss_try = logistic_loss_grad(Xs, y, n_classes, hp.l2, w_try, b_try, gw2, gb2);
      if (loss_try <= loss) {
        m.weights.swap(w_try);
        m.bias.swap(b_try);
        loss = loss_try;
        gw.swap(gw2);
        gb.swap(gb2);
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    m.loss_history.push_back(loss);
    if (!accepted) break;  // learning rate exhausted; already at a minimum
  }
  return m;
}

Mlp Mlp::init(const std::vector<int>& dims, std::uint64_t seed) {
  if (dims.size() < 2 || dims.back() != 2)
    throw InvalidParams("Mlp::init: dims must end with a 2-unit output");
  Mlp net;
  net.dims_ = dims;
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    total += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
  net.params_.resize(total);
  std::mt19937_64 rng(seed);
  std::size_t at = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double a = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    std::uniform_real_distribution<double> u(-a, a);
    for (int i = 0; i < dims[l] * dims[l + 1]; ++i) net.params_[at++] = u(rng);
    for (int i = 0; i < dims[l + 1]; ++i) net.params_[at++] = 0.0;
  }
  return net;
}

void Mlp::set_params(std::vector<double> p) {
  if (p.size() != params_.size())
    throw DimensionMismatch("Mlp::set_params: parameter count mismatch");
  params_ = std::move(p);
}

Mlp::LayerView Mlp::layer(int i) const {
  std::size_t at = 0;
  for (int l = 0; l < i; ++l)
    at += static_cast<std::size_t>(dims_[l]) * dims_[l + 1] + dims_[l + 1];
  LayerView v;
  v.in = dims_[i];
  v.out = dims_[i + 1];
  v.w = params_.data() + at;
  v.b = params_.data() + at + static_cast<std::size_t>(v.in) * v.out;
  return v;
}

std::array<double, 2> Mlp::forward(std::span<const double> x) const {
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  const int L = static_cast<int>(dims_.size()) - 1;
  for (int l = 0; l < L; ++l) {
    const LayerView lv = layer(l);
    next.assign(lv.out, 0.0);
    for (int o = 0; o < lv.out; ++o) {
      double z = lv.b[o];
      for (int i = 0; i < lv.in; ++i) z += lv.w[o * lv.in + i] * cur[i];
      next[o] = l == L - 1 ? z : softplus(z);
    }
    cur.swap(next);
  }
  return {cur[0], cur[1]};
}

double Mlp::nll_loss_grad(const std::vector<std::vector<double>>& X_std,
                          std::span<const double> targets, double t_mean, double t_scale,
                          double logv_lo, double logv_hi, double l2,
                          std::vector<double>& grad) const {
  grad.assign(params_.size(), 0.0);
  const std::size_t N = X_std.size();
  const int L = static_cast<int>(dims_.size()) - 1;
  const double logv_shift = 2.0 * std::log(t_scale);

  // Per-layer activations and pre-activations, reused across samples.
  std::vector<std::vector<double>> act(L + 1), pre(L);
  double loss = 0.0;

  for (std::size_t n = 0; n < N; ++n) {
    act[0] = X_std[n];
    for (int l = 0; l < L; ++l) {
      const LayerView lv = layer(l);
      pre[l].assign(lv.out, 0.0);
      act[l + 1].assign(lv.out, 0.0);
      for (int o = 0; o < lv.out; ++o) {
        double z = lv.b[o];
        for (int i = 0; i < lv.in; ++i) z += lv.w[o * lv.in + i] * act[l][i];
        pre[l][o] = z;
        act[l + 1][o] = l == L - 1 ? z : softplus(z);
      }
    }
    const double mu = t_mean + t_scale * act[L][0];
    double logv = act[L][1] + logv_shift;
    const bool clamped = logv < logv_lo || logv > logv_hi;
    logv = std::clamp(logv, logv_lo, logv_hi);
    const double inv_var = std::exp(-logv);
    const double err = targets[n] - mu;
    loss += 0.5 * (logv + err * err * inv_var);

    // dL/d(out0), dL/d(out1)
    std::vector<double> delta(2);
    delta[0] = -err * inv_var * t_scale;
    delta[1] = clamped ? 0.0 : 0.5 * (1.0 - err * err * inv_var);

    // Backprop.
    std::size_t layer_off = params_.size();
    for (int l = L - 1; l >= 0; --l) {
      const LayerView lv = layer(l);
      layer_off -= static_cast<std::size_t>(lv.in) * lv.out + lv.out;
      std::vector<double> prev_delta(lv.in, 0.0);
      for (int o = 0; o < lv.out; ++o) {
        const double d = delta[o];
        grad[layer_off + static_cast<std::size_t>(lv.in) * lv.out + o] += d;
        for (int i = 0; i < lv.in; ++i) {
          grad[layer_off + o * lv.in + i] += d * act[l][i];
          prev_delta[i] += d * lv.w[o * lv.in + i];
        }
      }
      if (l > 0)
        for (int i = 0; i < lv.in; ++i) prev_delta[i] *= sigmoid(pre[l - 1][i]);
      delta.swap(prev_delta);
    }
  }

  loss /= N;
  for (auto& g : grad) g /= N;

  // L2 on weights only.
  double reg = 0.0;
  std::size_t at = 0;
  for (int l = 0; l < L; ++l) {
    const LayerView lv = layer(l);
    const std::size_t nw = static_cast<std::size_t>(lv.in) * lv.out;
    for (std::size_t i = 0; i < nw; ++i) {
      reg += params_[at + i] * params_[at + i];
      grad[at + i] += l2 * params_[at + i];
    }
    at += nw + lv.out;
  }
  return loss + 0.5 * l2 * reg;
}

double Mlp::nll_loss(const std::vector<std::vector<double>>& X_std,
                     std::span<const double> targets, double t_mean, double t_scale,
                     double logv_lo, double logv_hi, double l2) const {
  const std::size_t N = X_std.size();
  const double logv_shift = 2.0 * std::log(t_scale);
  double loss = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const auto out = forward(X_std[n]);
    const double mu = t_mean + t_scale * out[0];
    const double logv = std::clamp(out[1] + logv_shift, logv_lo, logv_hi);
    const double err = targets[n] - mu;
    loss += 0.5 * (logv + err * err * std::exp(-logv));
  }
  loss /= N;
  double reg = 0.0;
  const int L = static_cast<int>(dims_.size()) - 1;
  std::size_t at = 0;
  for (int l = 0; l < L; ++l) {
    const LayerView lv = layer(l);
    const std::size_t nw = static_cast<std::size_t>(lv.in) * lv.out;
    for (std::size_t i = 0; i < nw; ++i) reg += params_[at + i] * params_[at + i];
    at += nw + lv.out;
  }
  return loss + 0.5 * l2 * reg;
}

std::vector<double> train_mlp_nll(Mlp& net, const std::vector<std::vector<double>>& X_std,
                                  std::span<const double> targets, double t_mean,
                                  double t_scale, double logv_lo, double logv_hi,
                                  const TrainHParams& hp) {
  const std::size_t N = X_std.size();
  if (N == 0) throw EmptyDataset("train_mlp_nll: no rows");
  std::vector<double> history;
  history.push_back(net.nll_loss(X_std, targets, t_mean, t_scale, logv_lo, logv_hi, hp.l2));

  std::mt19937_64 rng(hp.seed);
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<double>> bx;
  std::vector<double> by, grad;
  const std::size_t B = std::max(1, hp.batch_size);

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < N; start += B) {
      const std::size_t end = std::min(N, start + B);
      bx.clear();
      by.clear();
      for (std::size_t i = start; i < end; ++i) {
        bx.push_back(X_std[order[i]]);
        by.push_back(targets[order[i]]);
      }
      net.nll_loss_grad(bx, by, t_mean, t_scale, logv_lo, logv_hi, hp.l2, grad);
      std::vector<double> p = net.params();
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= hp.lr * grad[i];
      net.set_params(std::move(p));
    }
    history.push_back(net.nll_loss(X_std, targets, t_mean, t_scale, logv_lo, logv_hi, hp.l2));
  }
  return history;
}

}  // namespace chanmap
