#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "driftcal/harness.hpp"

using namespace driftcal;

namespace {

struct Fixture {
  LabeledDataset val;
  LabeledDataset test;
  SoftmaxRegressionModel model;
};

Fixture make_fixture() {
  Fixture f;
  const LabeledDataset all = generate_blobs({4, 10, 120, 1.0, 0.15, 52});
  f.val.num_classes = f.test.num_classes = 4;
  // Samples are grouped by class; interleave the split.
  for (std::size_t i = 0; i < all.size(); ++i)
    (i % 2 == 0 ? f.val : f.test).samples.push_back(all.samples[i]);
  f.model = train_softmax_regression(f.val, {150, 1.0, 1e-4, 5});
  return f;
}

SweepSpec small_spec() {
  SweepSpec spec;
  spec.schedules.push_back({PerturbationKind::kGaussianNoise, {0.0, 0.05, 0.2}});
  spec.schedules.push_back({PerturbationKind::kSpeckleNoise, {0.0, 0.3}});
  spec.seed = 9;
  return spec;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("sweep report structure") {
  const Fixture f = make_fixture();
  const auto records = predict_logits(f.model, f.val);
  std::vector<NamedCalibrator> cals;
  cals.push_back({"TS", fit_temperature(records).calibrator});
  cals.push_back({"IRM", fit_irm(records).calibrator});

  const EvaluationReport rep = run_sweep(f.model, cals, f.test, small_spec());

  // 3 calibrators (Base auto-prepended) x (3 levels + micro) for gaussian
  // plus (2 levels + micro) for speckle.
  CHECK(rep.rows.size() == 3 * 4 + 3 * 3);
  CHECK(rep.rows.front().calibrator == "Base");
  CHECK_FALSE(rep.config_hash.empty());

  std::size_t micro_rows = 0;
  for (const auto& row : rep.rows) {
    if (!row.level.has_value()) ++micro_rows;
    CHECK(row.accuracy >= 0.0);
    CHECK(row.accuracy <= 1.0);
    CHECK(row.ece >= 0.0);
    CHECK(row.ece <= 1.0);
    CHECK(row.mean_confidence > 0.0);
    CHECK(row.mean_confidence <= 1.0);
    CHECK(std::isfinite(row.nll));
  }
  CHECK(micro_rows == 6);

  // Accuracy-preserving calibrators match Base accuracy row for row.
  for (const auto& row : rep.rows) {
    if (row.calibrator == "Base") continue;
    for (const auto& base : rep.rows) {
      if (base.calibrator != "Base" || base.perturbation != row.perturbation ||
          base.level != row.level)
        continue;
      CHECK(row.accuracy == doctest::Approx(base.accuracy).epsilon(1e-12));
    }
  }

  // Level 0 of every schedule is the identity, so rows agree across
  // perturbation kinds at level 0.
  for (const auto& row : rep.rows) {
    if (row.level != 0 || row.perturbation != "speckle") continue;
    for (const auto& other : rep.rows) {
      if (other.calibrator != row.calibrator || other.level != 0 ||
          other.perturbation != "gaussian")
        continue;
      CHECK(row.accuracy == doctest::Approx(other.accuracy));
      CHECK(row.ece == doctest::Approx(other.ece));
    }
  }

  CHECK_THROWS_AS(run_sweep(f.model, {}, f.test, small_spec()), ConfigError);
  SweepSpec empty;
  CHECK_THROWS_AS(run_sweep(f.model, cals, f.test, empty), ConfigError);
}

TEST_CASE("csv report format and byte determinism") {
  const Fixture f = make_fixture();
  const auto records = predict_logits(f.model, f.val);
  std::vector<NamedCalibrator> cals{{"TS", fit_temperature(records).calibrator}};
  const EvaluationReport rep = run_sweep(f.model, cals, f.test, small_spec());

  const std::string path = "/tmp/driftcal_test_report.csv";
  emit_report(rep, ReportFormat::kCsv, path);
  const std::string text = slurp(path);
  CHECK(text.rfind("calibrator,perturbation,level,param,accuracy,ece,debiased_ece,"
                   "nll,brier,entropy,mean_confidence\n", 0) == 0);
  CHECK(text.find("Base,gaussian,0,0.000000,") != std::string::npos);
  CHECK(text.find("TS,gaussian,micro,,") != std::string::npos);

  // Re-running the sweep and re-emitting yields byte-identical output.
  const EvaluationReport rep2 = run_sweep(f.model, cals, f.test, small_spec());
  const std::string path2 = "/tmp/driftcal_test_report2.csv";
  emit_report(rep2, ReportFormat::kCsv, path2);
  CHECK(slurp(path2) == text);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("json report round-trip") {
  const Fixture f = make_fixture();
  const auto records = predict_logits(f.model, f.val);
  std::vector<NamedCalibrator> cals{{"TS", fit_temperature(records).calibrator}};
  SweepSpec spec = small_spec();
  spec.in_family_kinds = {"gaussian"};
  const EvaluationReport rep = run_sweep(f.model, cals, f.test, spec);

  const std::string path = "/tmp/driftcal_test_report.json";
  emit_report(rep, ReportFormat::kJson, path);
  const EvaluationReport back = load_report_json(path);
  CHECK(back.seed == rep.seed);
  CHECK(back.num_bins == rep.num_bins);
  CHECK(back.config_hash == rep.config_hash);
  CHECK(back.in_family_kinds == rep.in_family_kinds);
  CHECK(back.entropy_unit == "nat");
  REQUIRE(back.rows.size() == rep.rows.size());
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(back.rows[i].calibrator == rep.rows[i].calibrator);
    CHECK(back.rows[i].level == rep.rows[i].level);
    CHECK(back.rows[i].ece == doctest::Approx(rep.rows[i].ece).epsilon(1e-12));
  }
  std::remove(path.c_str());

  const std::string bad = "/tmp/driftcal_test_report_bad.json";
  {
    std::ofstream out(bad);
    out << "{ \"rows\": [] }";
  }
  CHECK_THROWS_AS(load_report_json(bad), DataError);
  std::remove(bad.c_str());
}

TEST_CASE("confidence histogram") {
  const Fixture f = make_fixture();
  const BaseCalibrator base;
  const auto counts = confidence_histogram(f.model, base, f.test, 10);
  REQUIRE(counts.size() == 10);
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  CHECK(total == f.test.size());
  // Max-probability over 4 classes is always >= 0.25: the first two buckets
  // stay empty.
  CHECK(counts[0] == 0);
  CHECK(counts[1] == 0);
  CHECK_THROWS_AS(confidence_histogram(f.model, base, f.test, 0), ConfigError);

  const std::string path = "/tmp/driftcal_test_hist.csv";
  emit_histogram(counts, path);
  const std::string text = slurp(path);
  CHECK(text.rfind("bucket_low,bucket_high,count\n", 0) == 0);
  CHECK(text.find("0.900000,1.000000,") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("valsize sweep") {
  const Fixture f = make_fixture();
  TunerConfig tcfg;
  tcfg.num_levels = 3;
  tcfg.nm_max_iters = 25;
  tcfg.eval_seed = 2;
  SweepSpec spec;
  spec.schedules.push_back({PerturbationKind::kGaussianNoise, {0.0, 0.1}});
  spec.seed = 4;

  const ValsizeReport rep =
      valsize_sweep(f.model, f.val, f.test, {60, f.val.size()}, {"ts"}, tcfg, spec);
  REQUIRE(rep.rows.size() == 4);  // 2 sizes x {ts, ts-p}
  CHECK(rep.rows[0].calibrator == "ts");
  CHECK(rep.rows[1].calibrator == "ts-p");
  CHECK(rep.rows[0].size == 60);
  CHECK(rep.rows[2].size == f.val.size());
  for (const auto& row : rep.rows) {
    CHECK(row.mean_micro_ece >= 0.0);
    CHECK(row.mean_micro_ece <= 1.0);
    CHECK(row.accuracy > 0.5);  // unperturbed accuracy on a separable task
  }

  CHECK_THROWS_AS(
      valsize_sweep(f.model, f.val, f.test, {f.val.size() + 1}, {"ts"}, tcfg, spec),
      ConfigError);

  const std::string path = "/tmp/driftcal_test_valsize.csv";
  emit_valsize_report(rep, path);
  const std::string text = slurp(path);
  CHECK(text.rfind("calibrator,size,mean_micro_ece,accuracy\n", 0) == 0);
  CHECK(text.find("ts-p,60,") != std::string::npos);
  std::remove(path.c_str());
}
