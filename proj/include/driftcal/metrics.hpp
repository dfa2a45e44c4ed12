#pragma once

#include <vector>

#include "driftcal/data.hpp"

namespace driftcal {

struct PredictionSet {
  std::vector<double> confidence;        // max calibrated probability per sample
  std::vector<bool> correct;             // predicted class == label
  std::vector<ProbVector> probs;         // full vectors; may be empty
  std::vector<int> labels;               // may be empty when probs is empty

  std::size_t size() const { return confidence.size(); }
  void append(const PredictionSet& other);
};

// Build a PredictionSet by applying a probability transform to logit records.
PredictionSet make_predictions(const std::vector<LogitRecord>& records,
                               const std::vector<ProbVector>& calibrated);

struct ReliabilityBin {
  std::size_t count = 0;
  double mean_confidence = 0.0;  // valid only when count > 0
  double mean_accuracy = 0.0;    // valid only when count > 0
};

struct ReliabilityBins {
  std::vector<ReliabilityBin> bins;
  std::size_t total = 0;
};

inline constexpr int kDefaultBins = 15;

// Equal-width partition ((m-1)/M, m/M]; confidence 0 goes to the first bin.
ReliabilityBins reliability_bins(const PredictionSet& preds, int m = kDefaultBins);

double ece(const PredictionSet& preds, int m = kDefaultBins);

// L2 debiased plugin estimator: sqrt(max(0, sum w_m [(acc-conf)^2 - var_m])).
double debiased_ece(const PredictionSet& preds, int m = kDefaultBins);

// Plugin l2 estimator without the variance correction (upper bound reference).
double plugin_l2_ece(const PredictionSet& preds, int m = kDefaultBins);

double nll(const std::vector<ProbVector>& probs, const std::vector<int>& labels);

double brier(const std::vector<ProbVector>& probs, const std::vector<int>& labels);

double predictive_entropy(const std::vector<ProbVector>& probs);

double micro_averaged_ece(const std::vector<PredictionSet>& per_level, int m = kDefaultBins);

}  // namespace driftcal
