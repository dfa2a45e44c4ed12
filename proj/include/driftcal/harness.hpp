#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "driftcal/calibrators.hpp"
#include "driftcal/metrics.hpp"
#include "driftcal/models.hpp"
#include "driftcal/perturb.hpp"
#include "driftcal/tuner.hpp"

namespace driftcal {

struct NamedCalibrator {
  std::string name;
  CalibratorPtr calibrator;
};

struct SweepSpec {
  std::vector<LevelSchedule> schedules;
  int num_bins = kDefaultBins;
  std::uint64_t seed = 0;
  // Kinds tuned on (the Gaussian family for "-P" calibrators); flagged
  // in report metadata as in-family rather than unseen.
  std::vector<std::string> in_family_kinds;
};

struct ReportRow {
  std::string calibrator;
  std::string perturbation;
  std::optional<int> level;  // nullopt marks the micro-average row
  double param = 0.0;
  double accuracy = 0.0;
  double ece = 0.0;
  double debiased_ece = 0.0;
  double nll = 0.0;
  double brier = 0.0;
  double entropy = 0.0;
  double mean_confidence = 0.0;
};

struct EvaluationReport {
  std::vector<ReportRow> rows;
  std::uint64_t seed = 0;
  int num_bins = kDefaultBins;
  std::vector<std::string> in_family_kinds;
  std::string config_hash;
  std::string entropy_unit = "nat";
};

EvaluationReport run_sweep(const SoftmaxRegressionModel& model,
                           const std::vector<NamedCalibrator>& calibrators,
                           const LabeledDataset& testset, const SweepSpec& spec);

// Counts of max-confidence values in equal-width buckets over [0,1].
std::vector<std::size_t> confidence_histogram(const SoftmaxRegressionModel& model,
                                              const Calibrator& calibrator,
                                              const LabeledDataset& dataset,
                                              int buckets);

struct ValsizeRow {
  std::string calibrator;  // method name, with "-p" suffix for tuned variants
  std::size_t size = 0;
  double mean_micro_ece = 0.0;
  double accuracy = 0.0;  // at the unperturbed level
};

struct ValsizeReport {
  std::vector<ValsizeRow> rows;
};

// For each validation-set size: subsample, tune standard and "-P" variants,
// evaluate mean micro ECE and accuracy over the test sweep.
ValsizeReport valsize_sweep(const SoftmaxRegressionModel& model,
                            const LabeledDataset& val, const LabeledDataset& test,
                            const std::vector<std::size_t>& sizes,
                            const std::vector<std::string>& kinds,
                            const TunerConfig& tuner_cfg, const SweepSpec& spec);

enum class ReportFormat { kCsv, kJson };

void emit_report(const EvaluationReport& report, ReportFormat format,
                 const std::string& path);
EvaluationReport load_report_json(const std::string& path);

void emit_valsize_report(const ValsizeReport& report, const std::string& path);

void emit_histogram(const std::vector<std::size_t>& counts, const std::string& path);

}  // namespace driftcal
