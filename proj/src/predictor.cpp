// SPDX-License-Identifier: Apache-2.0
#include "chanmap/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace chanmap {

namespace {
constexpr int kModelVersion = 1;

int sidx(LinkState s) { return static_cast<int>(s); }
}  // namespace

std::array<double, 3> LinkStateClassifier::posterior(LinkState s_hat, double d,
                                                     double d_unobs) const {
  if (!trained) throw UntrainedModel("link state classifier is untrained");
  const std::array<double, 2> x{d, d_unobs};
  const std::vector<double> p = per_s_hat[sidx(s_hat)].predict_proba(x);
  return {p[0], p[1], p[2]};
}

GainPredictor::NetId GainPredictor::route(LinkState estimated, LinkState s_hat) {
  switch (estimated) {
    case LinkState::LOS:
      return s_hat == LinkState::LOS ? NetId::LosLos : NetId::LosOther;
    case LinkState::NLOS:
      return s_hat == LinkState::LOS ? NetId::NlosLos : NetId::NlosNlosOut;
    case LinkState::Outage:
      return NetId::OutageConstant;
  }
  return NetId::OutageConstant;
}

namespace {

std::vector<double> net_inputs(const GainNetwork& gn, const FeatureVector& fv) {
  if (gn.n_inputs == 1) return {fv.d};
  return {fv.d, fv.d_unobs, fv.g_hat_omni};
}

GaussianGain eval_network(const GainNetwork& gn, const FeatureVector& fv, double g_min_db) {
  const std::vector<double> xs = gn.in_scaler.transform(net_inputs(gn, fv));
  const auto out = gn.net.forward(xs);
  GaussianGain g;
  g.mean_db = std::clamp(gn.target_mean + gn.target_scale * out[0], g_min_db, 0.0);
  g.log_variance =
      std::clamp(out[1] + 2.0 * std::log(gn.target_scale), kLogVarLo, kLogVarHi);
  return g;
}

}  // namespace

GaussianGain GainPredictor::evaluate(LinkState estimated, const FeatureVector& fv) const {
  if (!trained) throw UntrainedModel("gain predictor is untrained");
  switch (route(estimated, fv.s_hat)) {
    case NetId::LosLos: return eval_network(los_los, fv, g_min_db);
    case NetId::LosOther: return eval_network(los_other, fv, g_min_db);
    case NetId::NlosNlosOut: return eval_network(nlos_nlos_out, fv, g_min_db);
    case NetId::NlosLos: return eval_network(nlos_los, fv, g_min_db);
    case NetId::OutageConstant: return {g_min_db, 0.0};
  }
  return {g_min_db, 0.0};
}

double IndoorClassifier::p_indoor(LinkState s_hat, double d_unobs) const {
  if (!trained) throw UntrainedModel("indoor classifier is untrained");
  const std::array<double, 1> x{d_unobs};
  // Class 1 = indoor.
  return per_s_hat[sidx(s_hat)].predict_proba(x)[1];
}

LinkState ChannelPrediction::predicted_state() const {
  int best = 0;
  for (int k = 1; k < 3; ++k)
    if (posterior[k] > posterior[best]) best = k;
  return static_cast<LinkState>(best);
}

double ChannelPrediction::mean_for(LinkState s) const {
  switch (s) {
    case LinkState::LOS: return los_gain.mean_db;
    case LinkState::NLOS: return nlos_gain.mean_db;
    case LinkState::Outage: return outage_gain_db;
  }
  return outage_gain_db;
}

bool operator==(const ChannelPrediction& a, const ChannelPrediction& b) {
  return a.posterior == b.posterior && a.los_gain.mean_db == b.los_gain.mean_db &&
         a.los_gain.log_variance == b.los_gain.log_variance &&
         a.nlos_gain.mean_db == b.nlos_gain.mean_db &&
         a.nlos_gain.log_variance == b.nlos_gain.log_variance &&
         a.outage_gain_db == b.outage_gain_db && a.p_indoor == b.p_indoor;
}

LinkStateClassifier train_link_classifier(const std::vector<ClassifierRow>& rows,
                                          const TrainHParams& hp) {
  if (rows.empty()) throw EmptyDataset("train_link_classifier: no rows");

  std::array<std::size_t, 3> global_counts{0, 0, 0};
  for (const auto& r : rows) ++global_counts[sidx(r.true_s)];

  LinkStateClassifier clf;
  for (int s_hat = 0; s_hat < 3; ++s_hat) {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (const auto& r : rows) {
      if (sidx(r.phi.s_hat) != s_hat) continue;
      X.push_back({r.phi.d, r.phi.d_unobs});
      y.push_back(sidx(r.true_s));
    }
    if (X.empty()) {
      // No rows ever observed with this partial state: fall back to the
      // global class prior.
      LogisticModel m;
      m.n_classes = 3;
      m.n_features = 2;
      m.degenerate = true;
      m.degenerate_probs.assign(3, 0.0);
      for (int k = 0; k < 3; ++k)
        m.degenerate_probs[k] = static_cast<double>(global_counts[k]) / rows.size();
      clf.per_s_hat[s_hat] = std::move(m);
      continue;
    }
    clf.per_s_hat[s_hat] = LogisticModel::train(X, y, 3, hp);
  }
  clf.trained = true;
  return clf;
}

namespace {

GainNetwork train_gain_network(const std::vector<const GainRow*>& rows, bool wide_inputs,
                               int hidden_units, const TrainHParams& hp, bool fallback) {
  GainNetwork gn;
  gn.n_inputs = wide_inputs ? 3 : 1;
  gn.fallback = fallback;
  std::vector<std::vector<double>> X;
  std::vector<double> t;
  for (const GainRow* r : rows) {
    if (wide_inputs)
      X.push_back({r->phi.d, r->phi.d_unobs, r->phi.g_hat_omni});
    else
      X.push_back({r->phi.d});
    t.push_back(r->true_g_omni);
  }
  gn.in_scaler = Scaler::fit(X);
  double mean = 0.0;
  for (double v : t) mean += v;
  mean /= t.size();
  double var = 0.0;
  for (double v : t) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / t.size());
  gn.target_mean = mean;
  gn.target_scale = sd > 1e-6 ? sd : 1.0;

  for (auto& x : X) x = gn.in_scaler.transform(x);
  gn.net = Mlp::init({gn.n_inputs, hidden_units, hidden_units, 2}, hp.seed);
  train_mlp_nll(gn.net, X, t, gn.target_mean, gn.target_scale, kLogVarLo, kLogVarHi, hp);
  return gn;
}

}  // namespace

GainPredictor train_gain_predictor(const std::vector<GainRow>& rows, const TrainHParams& hp,
                                   double g_min_db) {
  if (rows.empty()) throw EmptyDataset("train_gain_predictor: no rows");

  std::vector<const GainRow*> los_match, los_other, nlos_match, nlos_other;
  std::vector<const GainRow*> all_los, all_nlos;
  for (const auto& r : rows) {
    if (r.true_s == LinkState::Outage) continue;  // the g_min convention, no model
    if (r.true_s == LinkState::LOS) {
      all_los.push_back(&r);
      (r.phi.s_hat == LinkState::LOS ? los_match : los_other).push_back(&r);
    } else {
      all_nlos.push_back(&r);
      (r.phi.s_hat == LinkState::LOS ? nlos_other : nlos_match).push_back(&r);
    }
  }
  if (all_los.empty())
    throw EmptyStratum("train_gain_predictor: no LOS rows (Table rows 'LOS/LOS' and 'LOS/NLOS,Out')");
  if (all_nlos.empty())
    throw EmptyStratum("train_gain_predictor: no NLOS rows (Table rows 'NLOS/NLOS,Out' and 'NLOS/LOS')");

  GainPredictor gp;
  gp.g_min_db = g_min_db;
  TrainHParams h = hp;

  auto next_seed = [&h]() { return h.seed++; };
  auto train_head = [&](const std::vector<const GainRow*>& stratum,
                        const std::vector<const GainRow*>& same_state, bool wide,
                        int units) {
    TrainHParams hh = h;
    hh.seed = next_seed();
    if (!stratum.empty()) return train_gain_network(stratum, wide, units, hh, false);
    return train_gain_network(same_state, false, 10, hh, true);
  };

  gp.los_los = train_head(los_match, all_los, true, 20);
  gp.los_other = train_head(los_other, all_los, false, 10);
  gp.nlos_nlos_out = train_head(nlos_match, all_nlos, true, 20);
  gp.nlos_los = train_head(nlos_other, all_nlos, false, 10);
  gp.trained = true;
  return gp;
}

IndoorClassifier train_indoor_classifier(const std::vector<IndoorRow>& rows,
                                         const TrainHParams& hp) {
  if (rows.empty()) throw EmptyDataset("train_indoor_classifier: no rows");

  IndoorClassifier ic;
  for (int s_hat = 0; s_hat < 3; ++s_hat) {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (const auto& r : rows) {
      if (sidx(r.s_hat) != s_hat) continue;
      X.push_back({r.d_unobs});
      y.push_back(r.rx_is_indoor ? 1 : 0);
    }
    if (X.empty()) {
      LogisticModel m;
      m.n_classes = 2;
      m.n_features = 1;
      m.degenerate = true;
      double p_in = 0.0;
      for (const auto& r : rows) p_in += r.rx_is_indoor ? 1.0 : 0.0;
      p_in /= rows.size();
      m.degenerate_probs = {1.0 - p_in, p_in};
      ic.per_s_hat[s_hat] = std::move(m);
      continue;
    }
    ic.per_s_hat[s_hat] = LogisticModel::train(X, y, 2, hp);
    // Keep the degenerate constant strictly inside (0, 1) so downstream
    // mixing stays well behaved, but saturated enough to be decisive.
    if (ic.per_s_hat[s_hat].degenerate) {
      auto& p = ic.per_s_hat[s_hat].degenerate_probs;
      for (double& v : p) v = std::clamp(v, 1e-6, 1.0 - 1e-6);
      const double sum = p[0] + p[1];
      p[0] /= sum;
      p[1] /= sum;
    }
  }
  ic.trained = true;
  return ic;
}

std::array<double, 3> apply_indoor_correction(const std::array<double, 3>& posterior,
                                              double p_in) {
  return {posterior[0] * p_in, posterior[1] * p_in, posterior[2] * p_in + (1.0 - p_in)};
}

ChannelPrediction predict(const FeatureVector& fv, const PredictorModel& model) {
  if (!model.classifier.trained || !model.gains.trained)
    throw UntrainedModel("predict: model is untrained");
  ChannelPrediction cp;
  cp.posterior = model.classifier.posterior(fv.s_hat, fv.d, fv.d_unobs);
  cp.los_gain = model.gains.evaluate(LinkState::LOS, fv);
  cp.nlos_gain = model.gains.evaluate(LinkState::NLOS, fv);
  cp.outage_gain_db = model.g_min_db;
  if (model.indoor.has_value()) {
    cp.p_indoor = model.indoor->p_indoor(fv.s_hat, fv.d_unobs);
    cp.posterior = apply_indoor_correction(cp.posterior, cp.p_indoor);
  }
  return cp;
}

// ---------------------------------------------------------------------------
// Model bundle serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json logistic_to_json(const LogisticModel& m) {
  return nlohmann::json{{"n_classes", m.n_classes},
                        {"n_features", m.n_features},
                        {"scaler_mean", m.scaler.mean},
                        {"scaler_scale", m.scaler.scale},
                        {"weights", m.weights},
                        {"bias", m.bias},
                        {"degenerate", m.degenerate},
                        {"degenerate_probs", m.degenerate_probs}};
}

LogisticModel logistic_from_json(const nlohmann::json& j) {
  LogisticModel m;
  m.n_classes = j.at("n_classes").get<int>();
  m.n_features = j.at("n_features").get<int>();
  m.scaler.mean = j.at("scaler_mean").get<std::vector<double>>();
  m.scaler.scale = j.at("scaler_scale").get<std::vector<double>>();
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<std::vector<double>>();
  m.degenerate = j.at("degenerate").get<bool>();
  m.degenerate_probs = j.at("degenerate_probs").get<std::vector<double>>();
  if (!m.degenerate &&
      (m.weights.size() != static_cast<std::size_t>(m.n_classes) * m.n_features ||
       m.bias.size() != static_cast<std::size_t>(m.n_classes)))
    throw CorruptModelFile("logistic block has inconsistent shapes");
  return m;
}

nlohmann::json network_to_json(const GainNetwork& gn) {
  return nlohmann::json{{"dims", gn.net.dims()},
                        {"params", gn.net.params()},
                        {"scaler_mean", gn.in_scaler.mean},
                        {"scaler_scale", gn.in_scaler.scale},
                        {"target_mean", gn.target_mean},
                        {"target_scale", gn.target_scale},
                        {"n_inputs", gn.n_inputs},
                        {"fallback", gn.fallback}};
}

GainNetwork network_from_json(const nlohmann::json& j) {
  GainNetwork gn;
  const auto dims = j.at("dims").get<std::vector<int>>();
  gn.net = Mlp::init(dims, 0);
  auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != gn.net.n_params())
    throw CorruptModelFile("gain network parameter count mismatch");
  gn.net.set_params(std::move(params));
  gn.in_scaler.mean = j.at("scaler_mean").get<std::vector<double>>();
  gn.in_scaler.scale = j.at("scaler_scale").get<std::vector<double>>();
  gn.target_mean = j.at("target_mean").get<double>();
  gn.target_scale = j.at("target_scale").get<double>();
  gn.n_inputs = j.at("n_inputs").get<int>();
  gn.fallback = j.at("fallback").get<bool>();
  if (dims.empty() || dims[0] != gn.n_inputs)
    throw CorruptModelFile("gain network input width mismatch");
  return gn;
}

const char* const kShatKeys[3] = {"los", "nlos", "outage"};

}  // namespace

std::string model_to_json(const PredictorModel& model) {
  nlohmann::json j;
  j["version"] = kModelVersion;
  j["g_min_db"] = model.g_min_db;
  for (int k = 0; k < 3; ++k)
    j["link_state_classifier"][kShatKeys[k]] = logistic_to_json(model.classifier.per_s_hat[k]);
  j["gain_predictor"]["los_los"] = network_to_json(model.gains.los_los);
  j["gain_predictor"]["los_other"] = network_to_json(model.gains.los_other);
  j["gain_predictor"]["nlos_nlos_out"] = network_to_json(model.gains.nlos_nlos_out);
  j["gain_predictor"]["nlos_los"] = network_to_json(model.gains.nlos_los);
  j["has_indoor"] = model.indoor.has_value();
  if (model.indoor.has_value())
    for (int k = 0; k < 3; ++k)
      j["indoor_classifier"][kShatKeys[k]] = logistic_to_json(model.indoor->per_s_hat[k]);
  return j.dump(2) + "\n";
}

PredictorModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModelFile(std::string("model JSON parse error: ") + e.what());
  }
  try {
    const int version = j.at("version").get<int>();
    if (version != kModelVersion) {
      std::ostringstream os;
      os << "model version " << version << " unsupported (expected " << kModelVersion << ")";
      throw CorruptModelFile(os.str());
    }
    PredictorModel m;
    m.g_min_db = j.at("g_min_db").get<double>();
    for (int k = 0; k < 3; ++k)
      m.classifier.per_s_hat[k] =
          logistic_from_json(j.at("link_state_classifier").at(kShatKeys[k]));
    m.classifier.trained = true;
    m.gains.los_los = network_from_json(j.at("gain_predictor").at("los_los"));
    m.gains.los_other = network_from_json(j.at("gain_predictor").at("los_other"));
    m.gains.nlos_nlos_out = network_from_json(j.at("gain_predictor").at("nlos_nlos_out"));
    m.gains.nlos_los = network_from_json(j.at("gain_predictor").at("nlos_los"));
    m.gains.g_min_db = m.g_min_db;
    m.gains.trained = true;
    if (j.at("has_indoor").get<bool>()) {
      IndoorClassifier ic;
      for (int k = 0; k < 3; ++k)
        ic.per_s_hat[k] = logistic_from_json(j.at("indoor_classifier").at(kShatKeys[k]));
      ic.trained = true;
      m.indoor = std::move(ic);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModelFile(std::string("model JSON field error: ") + e.what());
  }
}

void save_model(const PredictorModel& model, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << model_to_json(model);
  if (!f) throw IoError("write failed: " + path);
}

PredictorModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  try {
    return model_from_json(os.str());
  } catch (const CorruptModelFile& e) {
    throw CorruptModelFile(std::string(e.what()) + " [" + path + "]");
  }
}

}  // namespace chanmap
