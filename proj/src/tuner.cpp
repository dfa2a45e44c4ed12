#include "driftcal/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "driftcal/optim.hpp"

namespace driftcal {

void TunerConfig::validate() const {
  if (num_levels < 2) throw ConfigError("tuner: num_levels must be >= 2");
  if (!(epsilon_init > 0.0)) throw ConfigError("tuner: epsilon_init must be > 0");
  if (!(nm_tolerance > 0.0)) throw ConfigError("tuner: nm_tolerance must be > 0");
  if (nm_max_iters < 1) throw ConfigError("tuner: nm_max_iters must be >= 1");
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0))
    throw ConfigError("tuner: subsample_fraction must be in (0,1]");
}

std::vector<double> accuracy_targets(int num_classes, double acc_max, int n) {
  if (num_classes < 2) throw ConfigError("accuracy_targets: C must be >= 2");
  if (n < 2) throw ConfigError("accuracy_targets: N must be >= 2");
  const double acc_min = 1.0 / static_cast<double>(num_classes);
  if (!(acc_max > acc_min))
    throw NumericError("accuracy_targets: model accuracy " + std::to_string(acc_max) +
                       " is no better than chance " + std::to_string(acc_min));
  std::vector<double> targets(n);
  const double step = (acc_max - acc_min) / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) targets[i] = acc_min + step * i;
  targets.front() = acc_min;
  targets.back() = acc_max;
  return targets;
}

EpsilonSchedule calibrate_epsilons(const SoftmaxRegressionModel& model,
                                   const LabeledDataset& valset,
                                   const TunerConfig& cfg) {
  cfg.validate();
  valset.validate();
  const double acc_max = accuracy(model, valset);

  EpsilonSchedule sched;
  sched.targets = accuracy_targets(model.num_classes, acc_max, cfg.num_levels);
  sched.epsilons.assign(cfg.num_levels, 0.0);
  sched.achieved_acc.assign(cfg.num_levels, 0.0);

  auto accuracy_at = [&](double eps) {
    return accuracy(model, perturb_dataset(valset, PerturbationKind::kGaussianNoise,
                                           eps, cfg.eval_seed));
  };

  double warm = cfg.epsilon_init;
  for (int i = 0; i < cfg.num_levels; ++i) {
    const double target = sched.targets[i];
    auto objective = [&](double eps) { return std::abs(accuracy_at(eps) - target); };
    const OptimResult1D r = nelder_mead_1d(objective, warm, cfg.nm_tolerance,
                                           cfg.nm_max_iters);
    sched.epsilons[i] = r.x;
    sched.achieved_acc[i] = accuracy_at(r.x);
    if (std::abs(sched.achieved_acc[i] - target) > 5.0 * cfg.nm_tolerance)
      sched.warnings.push_back("target " + std::to_string(target) + " missed: achieved " +
                               std::to_string(sched.achieved_acc[i]));
    warm = r.x;
  }
  return sched;
}

LabeledDataset build_perturbed_valset(const LabeledDataset& valset,
                                      const EpsilonSchedule& schedule,
                                      std::uint64_t seed,
                                      double subsample_fraction) {
  valset.validate();
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0))
    throw ConfigError("build_perturbed_valset: subsample_fraction must be in (0,1]");
  const std::size_t per_level = static_cast<std::size_t>(
      std::ceil(subsample_fraction * static_cast<double>(valset.size())));

  LabeledDataset out;
  out.num_classes = valset.num_classes;
  out.samples.reserve(per_level * schedule.targets.size());
  for (std::size_t level = 0; level < schedule.epsilons.size(); ++level) {
    const std::uint64_t level_seed = seed + 0x51ED2700ULL * (level + 1);
    LabeledDataset perturbed = perturb_dataset(
        valset, PerturbationKind::kGaussianNoise, schedule.epsilons[level], level_seed);
    if (per_level == valset.size()) {
      for (auto& g : perturbed.samples) out.samples.push_back(std::move(g));
    } else {
      std::vector<std::size_t> order(valset.size());
      std::iota(order.begin(), order.end(), 0u);
      std::mt19937_64 rng(level_seed ^ 0xABCDEF12ULL);
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t j = 0; j < per_level; ++j)
        out.samples.push_back(std::move(perturbed.samples[order[j]]));
    }
  }
  return out;
}

TunedCalibrator tune_calibrator_perturbed(const std::string& kind,
                                          const SoftmaxRegressionModel& model,
                                          const LabeledDataset& valset,
                                          const TunerConfig& cfg, int num_bins) {
  cfg.validate();
  EpsilonSchedule sched = calibrate_epsilons(model, valset, cfg);
  const LabeledDataset perturbed =
      build_perturbed_valset(valset, sched, cfg.eval_seed + 1, cfg.subsample_fraction);
  const std::vector<LogitRecord> records = predict_logits(model, perturbed);
  return {fit_calibrator(kind, records, num_bins), std::move(sched)};
}

void save_schedule(const EpsilonSchedule& s, const std::string& path) {
  nlohmann::json j;
  j["targets"] = s.targets;
  j["epsilons"] = s.epsilons;
  j["achieved"] = s.achieved_acc;
  j["N"] = s.levels();
  if (!s.warnings.empty()) j["warnings"] = s.warnings;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

EpsilonSchedule load_schedule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  EpsilonSchedule s;
  try {
    s.targets = j.at("targets").get<std::vector<double>>();
    s.epsilons = j.at("epsilons").get<std::vector<double>>();
    s.achieved_acc = j.at("achieved").get<std::vector<double>>();
    if (j.contains("warnings")) s.warnings = j["warnings"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  if (s.targets.size() != s.epsilons.size() || s.targets.size() != s.achieved_acc.size())
    throw DataError(path + ": schedule arrays are not index-aligned");
  return s;
}

}  // namespace driftcal
