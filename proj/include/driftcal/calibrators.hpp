#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftcal/data.hpp"

namespace driftcal {

inline constexpr double kTemperatureMin = 0.05;
inline constexpr double kTemperatureMax = 50.0;

struct FitReport {
  double objective = 0.0;
  int iterations = 0;
  bool converged = true;
};

// Non-decreasing step map: left-constant between breakpoints, clamped to
// [front value, back value] outside the observed range.
struct StepMap {
  std::vector<double> x;  // strictly increasing breakpoints
  std::vector<double> y;  // non-decreasing values

  double operator()(double s) const;
};

// Weighted least-squares isotonic fit (pool-adjacent-violators).
std::vector<double> pava(const std::vector<double>& values,
                         const std::vector<double>& weights);

class Calibrator {
 public:
  virtual ~Calibrator() = default;
  virtual std::string kind() const = 0;
  virtual ProbVector apply(const std::vector<double>& logits) const = 0;
  virtual nlohmann::json to_json() const = 0;

  std::vector<ProbVector> apply_all(const std::vector<LogitRecord>& records) const;
};

using CalibratorPtr = std::shared_ptr<const Calibrator>;

// Raw softmax ("Base" rows in reports).
class BaseCalibrator final : public Calibrator {
 public:
  std::string kind() const override { return "base"; }
  ProbVector apply(const std::vector<double>& logits) const override;
  nlohmann::json to_json() const override;
};

class TemperatureCalibrator final : public Calibrator {
 public:
  explicit TemperatureCalibrator(double t) : t_(t) {}
  std::string kind() const override { return "temperature"; }
  ProbVector apply(const std::vector<double>& logits) const override;
  nlohmann::json to_json() const override;
  double temperature() const { return t_; }

 private:
  double t_;
};

class EtsCalibrator final : public Calibrator {
 public:
  EtsCalibrator(double t, double w1, double w2, double w3)
      : t_(t), w1_(w1), w2_(w2), w3_(w3) {}
  std::string kind() const override { return "ets"; }
  ProbVector apply(const std::vector<double>& logits) const override;
  nlohmann::json to_json() const override;
  double temperature() const { return t_; }
  double w1() const { return w1_; }
  double w2() const { return w2_; }
  double w3() const { return w3_; }

 private:
  double t_, w1_, w2_, w3_;
};

class PlattCalibrator final : public Calibrator {
 public:
  PlattCalibrator(double a, double b) : a_(a), b_(b) {}
  std::string kind() const override { return "platt"; }
  ProbVector apply(const std::vector<double>& logits) const override;
  nlohmann::json to_json() const override;
  double a() const { return a_; }
  double b() const { return b_; }

 private:
  double a_, b_;
};

class HistogramCalibrator final : public Calibrator {
 public:
  explicit HistogramCalibrator(std::vector<double> bin_values)
      : bin_values_(std::move(bin_values)) {}
  std::string kind() const override { return "histogram"; }
  ProbVector apply(const std::vector<double>& logits) const override;
  nlohmann::json to_json() const override;
  const std::vector<double>& bin_values() const { return bin_values_; }

 private:
  std::vector<double> bin_values_;
};

// Per-class one-vs-rest isotonic maps with renormalization; may change argmax.
class IsotonicCalibrator final : public Calibrator {
 public:
  explicit IsotonicCalibrator(std::vector<StepMap> per_class)
      : maps_(std::move(per_class)) {}
  std::string kind() const override { return "isotonic"; }
  ProbVector apply(const std::vector<double>& logits) const override;
  nlohmann::json to_json() const override;
  const std::vector<StepMap>& maps() const { return maps_; }

 private:
  std::vector<StepMap> maps_;
};

// Single shared monotone map over pooled per-class scores; argmax-preserving.
class IrmCalibrator final : public Calibrator {
 public:
  explicit IrmCalibrator(StepMap map) : map_(std::move(map)) {}
  std::string kind() const override { return "irm"; }
  ProbVector apply(const std::vector<double>& logits) const override;
  nlohmann::json to_json() const override;
  const StepMap& map() const { return map_; }

 private:
  StepMap map_;
};

class TsIrCalibrator final : public Calibrator {
 public:
  TsIrCalibrator(double t, IsotonicCalibrator isotonic)
      : t_(t), isotonic_(std::move(isotonic)) {}
  std::string kind() const override { return "ts-ir"; }
  ProbVector apply(const std::vector<double>& logits) const override;
  nlohmann::json to_json() const override;
  double temperature() const { return t_; }
  const IsotonicCalibrator& isotonic() const { return isotonic_; }

 private:
  double t_;
  IsotonicCalibrator isotonic_;
};

// Platt stage followed by histogram binning of the scaled confidences.
class PbmcCalibrator final : public Calibrator {
 public:
  PbmcCalibrator(double a, double b, std::vector<double> bin_values)
      : a_(a), b_(b), bin_values_(std::move(bin_values)) {}
  std::string kind() const override { return "pbmc"; }
  ProbVector apply(const std::vector<double>& logits) const override;
  nlohmann::json to_json() const override;
  double a() const { return a_; }
  double b() const { return b_; }
  const std::vector<double>& bin_values() const { return bin_values_; }

 private:
  double a_, b_;
  std::vector<double> bin_values_;
};

struct FittedCalibrator {
  CalibratorPtr calibrator;
  FitReport report;
};

FittedCalibrator fit_temperature(const std::vector<LogitRecord>& val);
FittedCalibrator fit_ets(const std::vector<LogitRecord>& val);
FittedCalibrator fit_platt(const std::vector<LogitRecord>& val);
FittedCalibrator fit_histogram_binning(const std::vector<LogitRecord>& val,
                                       int num_bins = 15);
FittedCalibrator fit_isotonic(const std::vector<LogitRecord>& val);
FittedCalibrator fit_irm(const std::vector<LogitRecord>& val);
FittedCalibrator fit_ts_ir(const std::vector<LogitRecord>& val);
FittedCalibrator fit_pbmc(const std::vector<LogitRecord>& val, int num_bins = 15);

// kind in {ts, ets, platt, hb, ir, irm, ts-ir, pbmc}.
FittedCalibrator fit_calibrator(const std::string& kind,
                                const std::vector<LogitRecord>& val,
                                int num_bins = 15);

// Top-label log-odds margin: z_max - log sum_{c != argmax} exp(z_c).
double top_label_margin(const std::vector<double>& logits);

// Mean NLL of already-calibrated probability vectors against record labels.
double mean_nll(const std::vector<LogitRecord>& records,
                const std::vector<ProbVector>& probs);

void save_calibrator(const Calibrator& cal, const std::string& path);
CalibratorPtr load_calibrator(const std::string& path);
CalibratorPtr calibrator_from_json(const nlohmann::json& j);

}  // namespace driftcal
