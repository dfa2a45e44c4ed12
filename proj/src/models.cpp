#include "driftcal/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <json.hpp>

namespace driftcal {

namespace {
constexpr const char* kModelFormat = "drift-calib-model-v1";
}

std::vector<double> SoftmaxRegressionModel::logits_for(const SampleGrid& g) const {
  if (static_cast<int>(g.values.size()) != input_dim)
    throw DataError("predict: sample dimension " + std::to_string(g.values.size()) +
                    " != model input_dim " + std::to_string(input_dim));
  std::vector<double> z(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    double acc = bias[c];
    const auto& w = weights[c];
    for (int j = 0; j < input_dim; ++j) acc += w[j] * static_cast<double>(g.values[j]);
    z[c] = acc;
  }
  return z;
}

LabeledDataset generate_blobs(const BlobConfig& cfg) {
  if (cfg.num_classes < 2) throw ConfigError("blobs: num_classes must be >= 2");
  if (cfg.input_dim < 1) throw ConfigError("blobs: input_dim must be >= 1");
  if (cfg.samples_per_class < 1) throw ConfigError("blobs: samples_per_class must be >= 1");
  if (!(cfg.within_class_stddev > 0.0)) throw ConfigError("blobs: stddev must be > 0");
  if (!(cfg.class_center_scale > 0.0)) throw ConfigError("blobs: center scale must be > 0");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<std::vector<double>> centers(cfg.num_classes, std::vector<double>(cfg.input_dim));
  for (auto& ctr : centers)
    for (auto& v : ctr) v = cfg.class_center_scale * gauss(rng);

  const std::size_t n = static_cast<std::size_t>(cfg.num_classes) * cfg.samples_per_class;
  std::vector<std::vector<double>> raw(n, std::vector<double>(cfg.input_dim));
  std::vector<int> labels(n);
  std::size_t idx = 0;
  for (int c = 0; c < cfg.num_classes; ++c) {
    for (int s = 0; s < cfg.samples_per_class; ++s, ++idx) {
      labels[idx] = c;
      for (int j = 0; j < cfg.input_dim; ++j)
        raw[idx][j] = centers[c][j] + cfg.within_class_stddev * gauss(rng);
    }
  }

  // Per-dimension affine map into [0,1].
  LabeledDataset d;
  d.num_classes = cfg.num_classes;
  d.samples.resize(n);
  for (int j = 0; j < cfg.input_dim; ++j) {
    double lo = raw[0][j], hi = raw[0][j];
    for (const auto& x : raw) {
      lo = std::min(lo, x[j]);
      hi = std::max(hi, x[j]);
    }
    const double span = hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
      double v = span > 0.0 ? (raw[i][j] - lo) / span : 0.5;
      if (d.samples[i].values.empty()) {
        d.samples[i].shape = GridShape{1, 1, static_cast<std::size_t>(cfg.input_dim)};
        d.samples[i].values.resize(cfg.input_dim);
        d.samples[i].label = labels[i];
      }
      d.samples[i].values[j] = static_cast<float>(v);
    }
  }
  return d;
}

double training_loss(const SoftmaxRegressionModel& m, const LabeledDataset& d, double l2) {
  double nll = 0.0;
  for (const auto& g : d.samples) {
    ProbVector p = softmax(m.logits_for(g));
    nll += -std::log(std::max(p[g.label], 1e-300));
  }
  nll /= static_cast<double>(d.size());
  double reg = 0.0;
  for (const auto& row : m.weights)
    for (double w : row) reg += w * w;
  return nll + l2 * reg;
}

SoftmaxRegressionModel train_softmax_regression(const LabeledDataset& train,
                                                const TrainConfig& cfg) {
  train.validate();
  if (cfg.epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (cfg.l2 < 0.0) throw ConfigError("train: l2 must be >= 0");

  const int c = train.num_classes;
  const int dim = static_cast<int>(train.input_dim());
  const double n = static_cast<double>(train.size());

  SoftmaxRegressionModel m;
  m.num_classes = c;
  m.input_dim = dim;
  m.weights.assign(c, std::vector<double>(dim));
  m.bias.assign(c, 0.0);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> init(0.0, 0.01);
  for (auto& row : m.weights)
    for (auto& w : row) w = init(rng);

  std::vector<std::vector<double>> grad_w(c, std::vector<double>(dim));
  std::vector<double> grad_b(c);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (auto& row : grad_w) std::fill(row.begin(), row.end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);

    bool finite = true;
    for (const auto& g : train.samples) {
      ProbVector p = softmax(m.logits_for(g));
      for (int cc = 0; cc < c; ++cc) {
        const double delta = p[cc] - (cc == g.label ? 1.0 : 0.0);
        if (!std::isfinite(delta)) finite = false;
        grad_b[cc] += delta;
        auto& gw = grad_w[cc];
        for (int j = 0; j < dim; ++j) gw[j] += delta * static_cast<double>(g.values[j]);
      }
    }
    if (!finite || !std::isfinite(training_loss(m, train, cfg.l2)))
      throw NumericError("training diverged at epoch " + std::to_string(epoch));

    for (int cc = 0; cc < c; ++cc) {
      m.bias[cc] -= cfg.learning_rate * grad_b[cc] / n;
      auto& w = m.weights[cc];
      const auto& gw = grad_w[cc];
      for (int j = 0; j < dim; ++j)
        w[j] -= cfg.learning_rate * (gw[j] / n + 2.0 * cfg.l2 * w[j]);
    }
  }
  return m;
}

std::vector<LogitRecord> predict_logits(const SoftmaxRegressionModel& m,
                                        const LabeledDataset& d) {
  std::vector<LogitRecord> out;
  out.reserve(d.size());
  for (const auto& g : d.samples) out.push_back({m.logits_for(g), g.label});
  return out;
}

double accuracy(const std::vector<LogitRecord>& records) {
  if (records.empty()) throw DataError("accuracy: empty input");
  std::size_t hits = 0;
  for (const auto& r : records)
    if (static_cast<int>(argmax(r.logits)) == r.label) ++hits;
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double accuracy(const SoftmaxRegressionModel& m, const LabeledDataset& d) {
  return accuracy(predict_logits(m, d));
}

void save_model(const SoftmaxRegressionModel& m, const std::string& path) {
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["C"] = m.num_classes;
  j["D"] = m.input_dim;
  j["W"] = m.weights;
  j["b"] = m.bias;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

SoftmaxRegressionModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  if (!j.contains("format") || j["format"] != kModelFormat)
    throw DataError(path + ": unsupported model format");
  SoftmaxRegressionModel m;
  try {
    m.num_classes = j.at("C").get<int>();
    m.input_dim = j.at("D").get<int>();
    m.weights = j.at("W").get<std::vector<std::vector<double>>>();
    m.bias = j.at("b").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  if (static_cast<int>(m.weights.size()) != m.num_classes ||
      static_cast<int>(m.bias.size()) != m.num_classes)
    throw DataError(path + ": parameter shape mismatch");
  for (const auto& row : m.weights)
    if (static_cast<int>(row.size()) != m.input_dim)
      throw DataError(path + ": parameter shape mismatch");
  return m;
}

}  // namespace driftcal
