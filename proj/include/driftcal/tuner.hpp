#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "driftcal/calibrators.hpp"
#include "driftcal/models.hpp"
#include "driftcal/perturb.hpp"

namespace driftcal {

struct EpsilonSchedule {
  std::vector<double> targets;       // ascending, targets[0] = 1/C
  std::vector<double> epsilons;      // index-aligned noise variances
  std::vector<double> achieved_acc;  // accuracy reached at each epsilon
  std::vector<std::string> warnings;

  int levels() const { return static_cast<int>(targets.size()); }
};

struct TunerConfig {
  int num_levels = 10;
  double epsilon_init = 1.0;
  int nm_max_iters = 60;
  double nm_tolerance = 0.005;
  std::uint64_t eval_seed = 0;
  double subsample_fraction = 1.0;

  void validate() const;
};

// {1/C, ..., acc_max}, evenly spaced. Throws when acc_max <= 1/C.
std::vector<double> accuracy_targets(int num_classes, double acc_max, int n);

// Per-level noise variances such that model accuracy on the perturbed
// validation set tracks the evenly spaced targets; warm-started 1-D
// Nelder-Mead from the chance level upward. Each objective evaluation
// re-perturbs with the fixed eval seed so the search is deterministic.
EpsilonSchedule calibrate_epsilons(const SoftmaxRegressionModel& model,
                                   const LabeledDataset& valset,
                                   const TunerConfig& config);

// Union over all levels of a freshly perturbed copy of the validation set;
// each level keeps ceil(subsample_fraction * |val|) samples.
LabeledDataset build_perturbed_valset(const LabeledDataset& valset,
                                      const EpsilonSchedule& schedule,
                                      std::uint64_t seed,
                                      double subsample_fraction = 1.0);

// The "-P" pipeline: epsilon calibration, perturbed-set construction, then
// a standard calibrator fit on the perturbed predictions.
struct TunedCalibrator {
  FittedCalibrator fitted;
  EpsilonSchedule schedule;
};
TunedCalibrator tune_calibrator_perturbed(const std::string& kind,
                                          const SoftmaxRegressionModel& model,
                                          const LabeledDataset& valset,
                                          const TunerConfig& config,
                                          int num_bins = 15);

void save_schedule(const EpsilonSchedule& s, const std::string& path);
EpsilonSchedule load_schedule(const std::string& path);

}  // namespace driftcal
