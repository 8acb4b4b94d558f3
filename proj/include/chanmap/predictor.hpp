// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "chanmap/features.hpp"
#include "chanmap/nn.hpp"
#include "chanmap/raytrace.hpp"

namespace chanmap {

/// One 3-class logistic classifier per partial-map link state, over the two
/// geometric features (d, d_unobs).
struct LinkStateClassifier {
  std::array<LogisticModel, 3> per_s_hat;
  bool trained = false;

  std::array<double, 3> posterior(LinkState s_hat, double d, double d_unobs) const;
};

struct GaussianGain {
  double mean_db = 0.0;
  double log_variance = 0.0;
};

/// One gain network: input scaler, target moments, and the MLP.
struct GainNetwork {
  Mlp net;
  Scaler in_scaler;
  double target_mean = 0.0;
  double target_scale = 1.0;
  int n_inputs = 0;
  bool fallback = false;  // trained on the distance-only fallback rows
};

constexpr double kLogVarLo = -4.0;
constexpr double kLogVarHi = 8.0;

/// Gain heads keyed by (estimated state, partial state) routing:
///   LOS    & s_hat==LOS          -> (d, d_unobs, g_hat) net, 2x20
///   LOS    & s_hat in {NLOS,Out} -> (d) net, 2x10
///   NLOS   & s_hat in {NLOS,Out} -> (d, d_unobs, g_hat) net, 2x20
///   NLOS   & s_hat==LOS          -> (d) net, 2x10
///   Outage                       -> the g_min constant, no network.
struct GainPredictor {
  enum class NetId { LosLos, LosOther, NlosNlosOut, NlosLos, OutageConstant };

  GainNetwork los_los, los_other, nlos_nlos_out, nlos_los;
  double g_min_db = -150.0;
  bool trained = false;

  static NetId route(LinkState estimated, LinkState s_hat);
  /// Mean clamped to [g_min, 0] dB, log-variance to [kLogVarLo, kLogVarHi].
  /// For Outage returns (g_min, zero variance) without touching a network.
  GaussianGain evaluate(LinkState estimated, const FeatureVector& fv) const;
};

/// Per-s_hat logistic P(RX indoor | d_unobs).
struct IndoorClassifier {
  std::array<LogisticModel, 3> per_s_hat;
  bool trained = false;

  double p_indoor(LinkState s_hat, double d_unobs) const;
};

struct ChannelPrediction {
  std::array<double, 3> posterior{0.0, 0.0, 0.0};  // LOS, NLOS, Outage
  GaussianGain los_gain;
  GaussianGain nlos_gain;
  double outage_gain_db = -150.0;
  double p_indoor = 1.0;

  /// Argmax with ties resolved in LOS < NLOS < Outage order.
  LinkState predicted_state() const;
  double mean_for(LinkState s) const;
  double predicted_mean_db() const { return mean_for(predicted_state()); }
};

bool operator==(const ChannelPrediction& a, const ChannelPrediction& b);

struct PredictorModel {
  LinkStateClassifier classifier;
  GainPredictor gains;
  std::optional<IndoorClassifier> indoor;
  double g_min_db = -150.0;
};

struct ClassifierRow {
  FeatureVector phi;
  LinkState true_s;
};

struct GainRow {
  FeatureVector phi;
  LinkState true_s;
  double true_g_omni;
};

struct IndoorRow {
  LinkState s_hat;
  double d_unobs;
  bool rx_is_indoor;
};

LinkStateClassifier train_link_classifier(const std::vector<ClassifierRow>& rows,
                                          const TrainHParams& hp);

/// Trains the four gain heads on Gaussian NLL. Outage rows are excluded. A
/// head whose (true state, partial state) stratum is empty falls back to all
/// rows of the same true state with the distance-only input; if an entire
/// true state has no rows at all, throws EmptyStratum naming the head.
GainPredictor train_gain_predictor(const std::vector<GainRow>& rows, const TrainHParams& hp,
                                   double g_min_db = -150.0);

IndoorClassifier train_indoor_classifier(const std::vector<IndoorRow>& rows,
                                         const TrainHParams& hp = {});

/// Mixes the posterior with the indoor probability under the assumption that
/// an outdoor RX is always in outage. Identity at p_in == 1.
std::array<double, 3> apply_indoor_correction(const std::array<double, 3>& posterior,
                                              double p_in);

ChannelPrediction predict(const FeatureVector& fv, const PredictorModel& model);

void save_model(const PredictorModel& model, const std::string& path);
PredictorModel load_model(const std::string& path);
std::string model_to_json(const PredictorModel& model);
PredictorModel model_from_json(const std::string& text);

}  // namespace chanmap
