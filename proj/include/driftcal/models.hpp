#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "driftcal/data.hpp"

namespace driftcal {

// Linear softmax classifier: logits = W x + b.
struct SoftmaxRegressionModel {
  int num_classes = 0;
  int input_dim = 0;
  std::vector<std::vector<double>> weights;  // C rows of D
  std::vector<double> bias;                  // length C

  std::vector<double> logits_for(const SampleGrid& g) const;
};

struct BlobConfig {
  int num_classes = 2;
  int input_dim = 2;
  int samples_per_class = 100;
  double class_center_scale = 1.0;
  double within_class_stddev = 0.1;
  std::uint64_t seed = 0;
};

// Isotropic Gaussian clusters, affinely mapped into [0,1] per dimension.
// Same config and seed always produce the identical dataset.
LabeledDataset generate_blobs(const BlobConfig& config);

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 0.5;
  double l2 = 0.0;
  std::uint64_t seed = 0;
};

// Full-batch gradient descent on mean NLL + l2*||W||^2.
SoftmaxRegressionModel train_softmax_regression(const LabeledDataset& train,
                                                const TrainConfig& config);

// Mean NLL + l2 penalty of the model on a dataset (the training objective).
double training_loss(const SoftmaxRegressionModel& m, const LabeledDataset& d, double l2);

std::vector<LogitRecord> predict_logits(const SoftmaxRegressionModel& m,
                                        const LabeledDataset& d);

double accuracy(const SoftmaxRegressionModel& m, const LabeledDataset& d);
double accuracy(const std::vector<LogitRecord>& records);

void save_model(const SoftmaxRegressionModel& m, const std::string& path);
SoftmaxRegressionModel load_model(const std::string& path);

}  // namespace driftcal
