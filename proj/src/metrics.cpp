#include "driftcal/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace driftcal {

void PredictionSet::append(const PredictionSet& other) {
  confidence.insert(confidence.end(), other.confidence.begin(), other.confidence.end());
  correct.insert(correct.end(), other.correct.begin(), other.correct.end());
  probs.insert(probs.end(), other.probs.begin(), other.probs.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

PredictionSet make_predictions(const std::vector<LogitRecord>& records,
                               const std::vector<ProbVector>& calibrated) {
  if (records.size() != calibrated.size())
    throw DataError("make_predictions: size mismatch");
  PredictionSet ps;
  ps.confidence.reserve(records.size());
  ps.correct.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::size_t pred = argmax(calibrated[i]);
    ps.confidence.push_back(calibrated[i][pred]);
    ps.correct.push_back(static_cast<int>(pred) == records[i].label);
    ps.labels.push_back(records[i].label);
  }
  ps.probs = calibrated;
  return ps;
}

ReliabilityBins reliability_bins(const PredictionSet& preds, int m) {
  if (preds.size() == 0) throw DataError("reliability_bins: empty predictions");
  if (m < 1) throw ConfigError("reliability_bins: M must be >= 1");
  ReliabilityBins rb;
  rb.bins.resize(m);
  rb.total = preds.size();
  std::vector<double> conf_sum(m, 0.0);
  std::vector<double> acc_sum(m, 0.0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double p = preds.confidence[i];
    // p in ((b-1)/M, b/M]; p = 0 goes to the first bin.
    int b = static_cast<int>(std::ceil(p * m)) - 1;
    b = std::clamp(b, 0, m - 1);
    rb.bins[b].count += 1;
    conf_sum[b] += p;
    acc_sum[b] += preds.correct[i] ? 1.0 : 0.0;
  }
  for (int b = 0; b < m; ++b) {
    if (rb.bins[b].count > 0) {
      rb.bins[b].mean_confidence = conf_sum[b] / static_cast<double>(rb.bins[b].count);
      rb.bins[b].mean_accuracy = acc_sum[b] / static_cast<double>(rb.bins[b].count);
    }
  }
  return rb;
}

double ece(const PredictionSet& preds, int m) {
  const ReliabilityBins rb = reliability_bins(preds, m);
  double sum = 0.0;
  for (const auto& bin : rb.bins) {
    if (bin.count == 0) continue;
    const double w = static_cast<double>(bin.count) / static_cast<double>(rb.total);
    sum += w * std::abs(bin.mean_accuracy - bin.mean_confidence);
  }
  return sum;
}

double plugin_l2_ece(const PredictionSet& preds, int m) {
  const ReliabilityBins rb = reliability_bins(preds, m);
  double sum = 0.0;
  for (const auto& bin : rb.bins) {
    if (bin.count == 0) continue;
    const double w = static_cast<double>(bin.count) / static_cast<double>(rb.total);
    const double gap = bin.mean_accuracy - bin.mean_confidence;
    sum += w * gap * gap;
  }
  return std::sqrt(sum);
}

double debiased_ece(const PredictionSet& preds, int m) {
  const ReliabilityBins rb = reliability_bins(preds, m);
  double sum = 0.0;
  for (const auto& bin : rb.bins) {
    if (bin.count == 0) continue;
    const double w = static_cast<double>(bin.count) / static_cast<double>(rb.total);
    const double gap = bin.mean_accuracy - bin.mean_confidence;
    double correction = 0.0;
    if (bin.count >= 2)
      correction = bin.mean_accuracy * (1.0 - bin.mean_accuracy) /
                   static_cast<double>(bin.count - 1);
    sum += w * (gap * gap - correction);
  }
  return std::sqrt(std::max(0.0, sum));
}

double nll(const std::vector<ProbVector>& probs, const std::vector<int>& labels) {
  if (probs.empty()) throw DataError("nll: empty input");
  if (probs.size() != labels.size()) throw DataError("nll: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= static_cast<int>(probs[i].size()))
      throw DataError("nll: label out of range");
    sum += -std::log(std::max(probs[i][y], 1e-12));
  }
  return sum / static_cast<double>(probs.size());
}

double brier(const std::vector<ProbVector>& probs, const std::vector<int>& labels) {
  if (probs.empty()) throw DataError("brier: empty input");
  if (probs.size() != labels.size()) throw DataError("brier: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const int y = labels[i];
    double s = 0.0;
    for (std::size_t c = 0; c < probs[i].size(); ++c) {
      const double diff = probs[i][c] - (static_cast<int>(c) == y ? 1.0 : 0.0);
      s += diff * diff;
    }
    sum += s;
  }
  return sum / static_cast<double>(probs.size());
}

double predictive_entropy(const std::vector<ProbVector>& probs) {
  if (probs.empty()) throw DataError("predictive_entropy: empty input");
  double sum = 0.0;
  for (const auto& p : probs) {
    double h = 0.0;
    for (double v : p)
      if (v > 0.0) h -= v * std::log(v);
    sum += h;
  }
  return sum / static_cast<double>(probs.size());
}

double micro_averaged_ece(const std::vector<PredictionSet>& per_level, int m) {
  PredictionSet pooled;
  for (const auto& level : per_level) pooled.append(level);
  if (pooled.size() == 0) throw DataError("micro_averaged_ece: all levels empty");
  return ece(pooled, m);
}

}  // namespace driftcal
