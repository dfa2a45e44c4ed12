#include "driftcal/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace driftcal {

namespace {

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Atomic write: temp file in the same directory, then rename.
void write_atomically(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

ReportRow metrics_row(const std::string& cal_name, const std::string& kind,
                      std::optional<int> level, double param,
                      const PredictionSet& preds, int num_bins) {
  ReportRow row;
  row.calibrator = cal_name;
  row.perturbation = kind;
  row.level = level;
  row.param = param;
  std::size_t hits = 0;
  double conf_sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    hits += preds.correct[i] ? 1 : 0;
    conf_sum += preds.confidence[i];
  }
  row.accuracy = static_cast<double>(hits) / static_cast<double>(preds.size());
  row.mean_confidence = conf_sum / static_cast<double>(preds.size());
  row.ece = ece(preds, num_bins);
  row.debiased_ece = debiased_ece(preds, num_bins);
  row.nll = nll(preds.probs, preds.labels);
  row.brier = brier(preds.probs, preds.labels);
  row.entropy = predictive_entropy(preds.probs);
  return row;
}

}  // namespace

EvaluationReport run_sweep(const SoftmaxRegressionModel& model,
                           const std::vector<NamedCalibrator>& calibrators,
                           const LabeledDataset& testset, const SweepSpec& spec) {
  testset.validate();
  if (spec.schedules.empty()) throw ConfigError("sweep: no perturbations given");
  if (calibrators.empty()) throw ConfigError("sweep: no calibrators given");

  std::vector<NamedCalibrator> all = calibrators;
  const bool has_base = std::any_of(all.begin(), all.end(),
                                    [](const auto& c) { return c.name == "Base"; });
  if (!has_base)
    all.insert(all.begin(), {"Base", std::make_shared<BaseCalibrator>()});

  EvaluationReport report;
  report.seed = spec.seed;
  report.num_bins = spec.num_bins;
  report.in_family_kinds = spec.in_family_kinds;
  {
    std::ostringstream cfg;
    for (const auto& s : spec.schedules) {
      cfg << to_string(s.kind) << ':';
      for (double p : s.params) cfg << p << ',';
    }
    cfg << "bins=" << spec.num_bins << ";seed=" << spec.seed;
    report.config_hash = fnv1a_hex(cfg.str());
  }

  for (const auto& schedule : spec.schedules) {
    const std::string kind_name = to_string(schedule.kind);
    std::vector<std::vector<PredictionSet>> per_cal_levels(all.size());

    for (std::size_t level = 0; level < schedule.params.size(); ++level) {
      const std::uint64_t level_seed =
          spec.seed + 0x9E3779B9ULL * (level + 1) +
          0x85EBCA6BULL * static_cast<std::uint64_t>(schedule.kind);
      const LabeledDataset perturbed =
          perturb_dataset(testset, schedule.kind, schedule.params[level], level_seed);
      const std::vector<LogitRecord> records = predict_logits(model, perturbed);
      for (std::size_t c = 0; c < all.size(); ++c) {
        per_cal_levels[c].push_back(
            make_predictions(records, all[c].calibrator->apply_all(records)));
      }
    }

    for (std::size_t c = 0; c < all.size(); ++c) {
      for (std::size_t level = 0; level < schedule.params.size(); ++level)
        report.rows.push_back(metrics_row(all[c].name, kind_name,
                                          static_cast<int>(level),
                                          schedule.params[level],
                                          per_cal_levels[c][level], spec.num_bins));
      PredictionSet pooled;
      for (const auto& ps : per_cal_levels[c]) pooled.append(ps);
      report.rows.push_back(metrics_row(all[c].name, kind_name, std::nullopt, 0.0,
                                        pooled, spec.num_bins));
    }
  }
  return report;
}

std::vector<std::size_t> confidence_histogram(const SoftmaxRegressionModel& model,
                                              const Calibrator& calibrator,
                                              const LabeledDataset& dataset,
                                              int buckets) {
  dataset.validate();
  if (buckets < 1) throw ConfigError("confidence_histogram: buckets must be >= 1");
  std::vector<std::size_t> counts(buckets, 0);
  for (const auto& r : predict_logits(model, dataset)) {
    const ProbVector p = calibrator.apply(r.logits);
    const double conf = p[argmax(p)];
    int b = static_cast<int>(conf * buckets);
    b = std::clamp(b, 0, buckets - 1);
    counts[b] += 1;
  }
  return counts;
}

ValsizeReport valsize_sweep(const SoftmaxRegressionModel& model,
                            const LabeledDataset& val, const LabeledDataset& test,
                            const std::vector<std::size_t>& sizes,
                            const std::vector<std::string>& kinds,
                            const TunerConfig& tuner_cfg, const SweepSpec& spec) {
  val.validate();
  ValsizeReport out;
  for (std::size_t size : sizes) {
    if (size > val.size())
      throw ConfigError("valsize_sweep: size " + std::to_string(size) +
                        " exceeds |val| = " + std::to_string(val.size()));
    LabeledDataset subset;
    subset.num_classes = val.num_classes;
    if (size == val.size()) {
      subset.samples = val.samples;
    } else {
      std::vector<std::size_t> order(val.size());
      std::iota(order.begin(), order.end(), 0u);
      std::mt19937_64 rng(spec.seed ^ 0x5EEDBA5EULL);
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t j = 0; j < size; ++j)
        subset.samples.push_back(val.samples[order[j]]);
    }

    const std::vector<LogitRecord> plain_records = predict_logits(model, subset);
    std::vector<NamedCalibrator> cals;
    for (const auto& kind : kinds) {
      cals.push_back({kind, fit_calibrator(kind, plain_records, spec.num_bins).calibrator});
      cals.push_back({kind + "-p",
                      tune_calibrator_perturbed(kind, model, subset, tuner_cfg,
                                                spec.num_bins).fitted.calibrator});
    }

    const EvaluationReport rep = run_sweep(model, cals, test, spec);
    for (const auto& nc : cals) {
      double micro_sum = 0.0;
      std::size_t micro_n = 0;
      double acc0 = 0.0;
      for (const auto& row : rep.rows) {
        if (row.calibrator != nc.name) continue;
        if (!row.level.has_value()) {
          micro_sum += row.ece;
          ++micro_n;
        } else if (*row.level == 0) {
          acc0 = row.accuracy;
        }
      }
      out.rows.push_back({nc.name, size, micro_sum / static_cast<double>(micro_n), acc0});
    }
  }
  return out;
}

namespace {

nlohmann::json row_to_json(const ReportRow& row) {
  nlohmann::json j;
  j["calibrator"] = row.calibrator;
  j["perturbation"] = row.perturbation;
  if (row.level.has_value()) {
    j["level"] = *row.level;
    j["param"] = row.param;
  } else {
    j["level"] = "micro";
  }
  j["accuracy"] = row.accuracy;
  j["ece"] = row.ece;
  j["debiased_ece"] = row.debiased_ece;
  j["nll"] = row.nll;
  j["brier"] = row.brier;
  j["entropy"] = row.entropy;
  j["mean_confidence"] = row.mean_confidence;
  return j;
}

}  // namespace

void emit_report(const EvaluationReport& report, ReportFormat format,
                 const std::string& path) {
  if (format == ReportFormat::kCsv) {
    std::ostringstream out;
    out << "calibrator,perturbation,level,param,accuracy,ece,debiased_ece,nll,"
           "brier,entropy,mean_confidence\n";
    for (const auto& row : report.rows) {
      out << row.calibrator << ',' << row.perturbation << ',';
      if (row.level.has_value())
        out << *row.level << ',' << fmt6(row.param) << ',';
      else
        out << "micro,,";
      out << fmt6(row.accuracy) << ',' << fmt6(row.ece) << ','
          << fmt6(row.debiased_ece) << ',' << fmt6(row.nll) << ','
          << fmt6(row.brier) << ',' << fmt6(row.entropy) << ','
          << fmt6(row.mean_confidence) << '\n';
    }
    write_atomically(path, out.str());
  } else {
    nlohmann::json j;
    j["metadata"] = {{"seed", report.seed},
                     {"bins", report.num_bins},
                     {"config_hash", report.config_hash},
                     {"entropy_unit", report.entropy_unit},
                     {"in_family_kinds", report.in_family_kinds}};
    j["rows"] = nlohmann::json::array();
    for (const auto& row : report.rows) j["rows"].push_back(row_to_json(row));
    write_atomically(path, j.dump(2) + "\n");
  }
}

EvaluationReport load_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  EvaluationReport report;
  try {
    const auto& meta = j.at("metadata");
    report.seed = meta.at("seed").get<std::uint64_t>();
    report.num_bins = meta.at("bins").get<int>();
    report.config_hash = meta.at("config_hash").get<std::string>();
    report.entropy_unit = meta.value("entropy_unit", "nat");
    report.in_family_kinds = meta.value("in_family_kinds", std::vector<std::string>{});
    for (const auto& r : j.at("rows")) {
      ReportRow row;
      row.calibrator = r.at("calibrator").get<std::string>();
      row.perturbation = r.at("perturbation").get<std::string>();
      if (r.at("level").is_number_integer()) {
        row.level = r.at("level").get<int>();
        row.param = r.at("param").get<double>();
      }
      row.accuracy = r.at("accuracy").get<double>();
      row.ece = r.at("ece").get<double>();
      row.debiased_ece = r.at("debiased_ece").get<double>();
      row.nll = r.at("nll").get<double>();
      row.brier = r.at("brier").get<double>();
      row.entropy = r.at("entropy").get<double>();
      row.mean_confidence = r.at("mean_confidence").get<double>();
      report.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return report;
}

void emit_valsize_report(const ValsizeReport& report, const std::string& path) {
  std::ostringstream out;
  out << "calibrator,size,mean_micro_ece,accuracy\n";
  for (const auto& row : report.rows)
    out << row.calibrator << ',' << row.size << ',' << fmt6(row.mean_micro_ece)
        << ',' << fmt6(row.accuracy) << '\n';
  write_atomically(path, out.str());
}

void emit_histogram(const std::vector<std::size_t>& counts, const std::string& path) {
  std::ostringstream out;
  out << "bucket_low,bucket_high,count\n";
  const double width = 1.0 / static_cast<double>(counts.size());
  for (std::size_t b = 0; b < counts.size(); ++b)
    out << fmt6(b * width) << ',' << fmt6((b + 1) * width) << ',' << counts[b] << '\n';
  write_atomically(path, out.str());
}

}  // namespace driftcal
