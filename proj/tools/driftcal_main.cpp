// Command-line front end: dataset generation, model training, calibrator
// tuning (standard and perturbed), perturbation sweeps and report emission.
#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driftcal/harness.hpp"

using namespace driftcal;

namespace {

DatasetFormat parse_format(const std::string& s) {
  if (s == "csv") return DatasetFormat::kCsv;
  if (s == "bin") return DatasetFormat::kRawBinary;
  throw ConfigError("unknown dataset format '" + s + "' (expected csv or bin)");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// Shared per-subcommand seed option; DRIFT_CALIB_SEED overrides the config
// file, an explicit flag overrides both.
void add_seed(CLI::App* cmd, std::uint64_t& seed) {
  cmd->add_option("--seed", seed, "random seed")->envname("DRIFT_CALIB_SEED");
}

void add_config(CLI::App* cmd) {
  // Token is consumed before parsing (see expand_config_args); registered
  // here so it shows up in --help.
  static std::string dummy;
  cmd->add_option("--config", dummy, "key = value config file; flags win");
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Pulls --config FILE out of the argument list and splices the file's
// key = value entries in as --key value tokens ahead of the explicit flags,
// so explicit flags win under the take-last policy. DRIFT_CALIB_SEED beats a
// seed line in the file.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> raw(argv + 1, argv + argc);
  std::string path;
  std::vector<std::string> args;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == "--config") {
      if (i + 1 >= raw.size()) throw ConfigError("--config needs a file path");
      path = raw[++i];
    } else if (raw[i].rfind("--config=", 0) == 0) {
      path = raw[i].substr(9);
    } else {
      args.push_back(raw[i]);
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::vector<std::string> from_file;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    if (key == "seed" && std::getenv("DRIFT_CALIB_SEED") != nullptr) continue;
    from_file.push_back("--" + key);
    from_file.push_back(value);
  }

  // Config tokens go right after the subcommand name.
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < args.size() && !args[i].empty() && args[i][0] == '-') out.push_back(args[i++]);
  if (i < args.size()) out.push_back(args[i++]);  // the subcommand
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), args.begin() + i, args.end());
  return out;
}

std::vector<LevelSchedule> resolve_schedules(const std::vector<std::string>& kinds,
                                             const std::string& gaussian_schedule,
                                             std::vector<std::string>& in_family) {
  std::vector<LevelSchedule> out;
  for (const auto& name : kinds) {
    if (name == "gaussian") {
      if (gaussian_schedule.empty())
        throw ConfigError("gaussian sweep needs --gaussian-schedule (tuned levels)");
      const EpsilonSchedule s = load_schedule(gaussian_schedule);
      LevelSchedule ls;
      ls.kind = PerturbationKind::kGaussianNoise;
      // Tuned epsilons run easy-to-hard; prepend the identity level.
      ls.params.push_back(0.0);
      for (auto it = s.epsilons.rbegin(); it != s.epsilons.rend(); ++it)
        ls.params.push_back(*it);
      out.push_back(std::move(ls));
      in_family.push_back("gaussian");
    } else if (name == "affine") {
      for (auto kind : {PerturbationKind::kRotateLeft, PerturbationKind::kRotateRight,
                        PerturbationKind::kShear, PerturbationKind::kShiftX,
                        PerturbationKind::kShiftY, PerturbationKind::kShiftXY,
                        PerturbationKind::kZoomX, PerturbationKind::kZoomY,
                        PerturbationKind::kZoomXY})
        out.push_back(builtin_schedule(kind));
    } else {
      out.push_back(builtin_schedule(perturbation_kind_from_string(name)));
    }
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"post-hoc confidence calibration with drift-aware tuning"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a Gaussian-blob dataset");
  BlobConfig blob;
  std::string gen_out, gen_format = "csv";
  std::size_t gen_h = 0, gen_w = 0;
  gen->add_option("--out", gen_out, "output path")->required();
  gen->add_option("--format", gen_format, "csv or bin");
  gen->add_option("--classes", blob.num_classes);
  gen->add_option("--dim", blob.input_dim);
  gen->add_option("--per-class", blob.samples_per_class);
  gen->add_option("--center-scale", blob.class_center_scale);
  gen->add_option("--stddev", blob.within_class_stddev);
  gen->add_option("--height", gen_h, "reshape features to a HxW grid (bin format)");
  gen->add_option("--width", gen_w, "reshape features to a HxW grid (bin format)");
  std::string gen_split;
  gen->add_option("--split-out", gen_split,
                  "write every other sample here (held-out half with the same blobs)");
  add_seed(gen, blob.seed);
  add_config(gen);

  // train
  auto* train = app.add_subcommand("train", "train a softmax regression model");
  TrainConfig tc;
  std::string train_data, train_format = "csv", train_out;
  train->add_option("--data", train_data)->required();
  train->add_option("--format", train_format, "csv or bin");
  train->add_option("--out", train_out, "model JSON path")->required();
  train->add_option("--epochs", tc.epochs);
  train->add_option("--lr", tc.learning_rate);
  train->add_option("--l2", tc.l2);
  add_seed(train, tc.seed);
  add_config(train);

  // tune (standard fit on in-domain logits)
  auto* tune = app.add_subcommand("tune", "fit a calibrator on validation data");
  std::string tune_model, tune_val, tune_val_format = "csv", tune_logits, tune_kind = "ts";
  std::string tune_out;
  int tune_bins = kDefaultBins;
  tune->add_option("--model", tune_model, "model JSON (with --val)");
  tune->add_option("--val", tune_val, "validation dataset");
  tune->add_option("--format", tune_val_format, "csv or bin");
  tune->add_option("--logits", tune_logits, "pre-computed logit CSV (alternative to --model/--val)");
  tune->add_option("--kind", tune_kind, "ts|ets|platt|hb|ir|irm|ts-ir|pbmc");
  tune->add_option("--bins", tune_bins);
  tune->add_option("--out", tune_out, "calibrator JSON path")->required();
  add_config(tune);

  // tune-p (perturbed validation set)
  auto* tunep = app.add_subcommand("tune-p", "fit a calibrator on a perturbed validation set");
  std::string tp_model, tp_val, tp_val_format = "csv", tp_kind = "ts", tp_out, tp_sched_out;
  int tp_bins = kDefaultBins;
  TunerConfig tp_cfg;
  tunep->add_option("--model", tp_model)->required();
  tunep->add_option("--val", tp_val)->required();
  tunep->add_option("--format", tp_val_format, "csv or bin");
  tunep->add_option("--kind", tp_kind, "ts|ets|platt|hb|ir|irm|ts-ir|pbmc");
  tunep->add_option("--bins", tp_bins);
  tunep->add_option("--levels", tp_cfg.num_levels, "number of noise levels N");
  tunep->add_option("--eps-init", tp_cfg.epsilon_init);
  tunep->add_option("--nm-iters", tp_cfg.nm_max_iters);
  tunep->add_option("--nm-tol", tp_cfg.nm_tolerance);
  tunep->add_option("--frac", tp_cfg.subsample_fraction, "per-level subsample fraction");
  tunep->add_option("--out", tp_out, "calibrator JSON path")->required();
  tunep->add_option("--schedule-out", tp_sched_out, "noise schedule JSON path");
  add_seed(tunep, tp_cfg.eval_seed);
  add_config(tunep);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "evaluate calibrators across perturbation levels");
  std::string sw_model, sw_test, sw_test_format = "csv", sw_out, sw_fmt = "csv";
  std::string sw_kinds = "affine", sw_gauss_sched;
  std::vector<std::string> sw_cals;
  int sw_bins = kDefaultBins;
  std::uint64_t sw_seed = 0;
  sweep->add_option("--model", sw_model)->required();
  sweep->add_option("--test", sw_test)->required();
  sweep->add_option("--format", sw_test_format, "csv or bin");
  sweep->add_option("--cal", sw_cals, "name=calibrator.json (repeatable)");
  sweep->add_option("--kinds", sw_kinds, "comma list; 'affine' expands to all warp schedules");
  sweep->add_option("--gaussian-schedule", sw_gauss_sched, "tuned schedule for gaussian levels");
  sweep->add_option("--bins", sw_bins);
  sweep->add_option("--report-format", sw_fmt, "csv or json");
  sweep->add_option("--out", sw_out)->required();
  add_seed(sweep, sw_seed);
  add_config(sweep);

  // valsize-sweep
  auto* vs = app.add_subcommand("valsize-sweep", "tuning quality vs validation-set size");
  std::string vs_model, vs_val, vs_test, vs_format = "csv", vs_out;
  std::string vs_sizes = "100,200,500", vs_kinds = "ts,ir", vs_pkinds = "affine", vs_gauss;
  int vs_bins = kDefaultBins;
  TunerConfig vs_cfg;
  std::uint64_t vs_seed = 0;
  vs->add_option("--model", vs_model)->required();
  vs->add_option("--val", vs_val)->required();
  vs->add_option("--test", vs_test)->required();
  vs->add_option("--format", vs_format, "csv or bin");
  vs->add_option("--sizes", vs_sizes, "comma list of subsample sizes");
  vs->add_option("--kinds", vs_kinds, "comma list of calibrator kinds");
  vs->add_option("--perturb-kinds", vs_pkinds, "sweep perturbations");
  vs->add_option("--gaussian-schedule", vs_gauss);
  vs->add_option("--bins", vs_bins);
  vs->add_option("--levels", vs_cfg.num_levels);
  vs->add_option("--out", vs_out)->required();
  add_seed(vs, vs_seed);
  add_config(vs);

  // confidence-hist
  auto* hist = app.add_subcommand("confidence-hist", "histogram of max-confidence values");
  std::string h_model, h_cal, h_data, h_format = "csv", h_out;
  int h_buckets = 20;
  hist->add_option("--model", h_model)->required();
  hist->add_option("--cal", h_cal, "calibrator JSON; omit for raw softmax");
  hist->add_option("--data", h_data)->required();
  hist->add_option("--format", h_format, "csv or bin");
  hist->add_option("--buckets", h_buckets);
  hist->add_option("--out", h_out)->required();
  add_config(hist);

  // report (JSON -> CSV conversion)
  auto* rep = app.add_subcommand("report", "convert a JSON report to CSV");
  std::string r_in, r_out;
  rep->add_option("--in", r_in)->required();
  rep->add_option("--out", r_out)->required();
  add_config(rep);

  // Explicit flags override config-file entries.
  for (CLI::App* cmd : app.get_subcommands({}))
    for (CLI::Option* opt : cmd->get_options())
      if (opt->get_expected_min() > 0 && opt->get_expected_max() == 1)
        opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  try {
    std::vector<std::string> args = expand_config_args(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (gen->parsed()) {
    LabeledDataset d = generate_blobs(blob);
    if (gen_h > 0 || gen_w > 0) {
      if (gen_h * gen_w != static_cast<std::size_t>(blob.input_dim))
        throw ConfigError("gen-data: --height * --width must equal --dim");
      for (auto& g : d.samples) g.shape = {gen_h, gen_w, 1};
    }
    if (!gen_split.empty()) {
      // Samples are grouped by class; interleave the split.
      LabeledDataset main_half, held_half;
      main_half.num_classes = held_half.num_classes = d.num_classes;
      for (std::size_t i = 0; i < d.size(); ++i)
        (i % 2 == 0 ? main_half : held_half).samples.push_back(std::move(d.samples[i]));
      write_dataset(main_half, gen_out, parse_format(gen_format));
      write_dataset(held_half, gen_split, parse_format(gen_format));
      std::cout << "wrote " << main_half.size() << " samples to " << gen_out << " and "
                << held_half.size() << " to " << gen_split << "\n";
      return 0;
    }
    write_dataset(d, gen_out, parse_format(gen_format));
    std::cout << "wrote " << d.size() << " samples to " << gen_out << "\n";
  } else if (train->parsed()) {
    const LabeledDataset d = load_dataset(train_data, parse_format(train_format));
    const SoftmaxRegressionModel m = train_softmax_regression(d, tc);
    save_model(m, train_out);
    std::cout << "train accuracy " << accuracy(m, d) << ", model saved to "
              << train_out << "\n";
  } else if (tune->parsed()) {
    std::vector<LogitRecord> records;
    if (!tune_logits.empty()) {
      records = load_logits(tune_logits);
    } else if (!tune_model.empty() && !tune_val.empty()) {
      const SoftmaxRegressionModel m = load_model(tune_model);
      records = predict_logits(m, load_dataset(tune_val, parse_format(tune_val_format)));
    } else {
      throw ConfigError("tune needs either --logits or both --model and --val");
    }
    const FittedCalibrator fit = fit_calibrator(tune_kind, records, tune_bins);
    save_calibrator(*fit.calibrator, tune_out);
    std::cout << "fitted " << fit.calibrator->kind() << " (objective "
              << fit.report.objective << "), saved to " << tune_out << "\n";
  } else if (tunep->parsed()) {
    const SoftmaxRegressionModel m = load_model(tp_model);
    const LabeledDataset val = load_dataset(tp_val, parse_format(tp_val_format));
    const TunedCalibrator tuned =
        tune_calibrator_perturbed(tp_kind, m, val, tp_cfg, tp_bins);
    save_calibrator(*tuned.fitted.calibrator, tp_out);
    if (!tp_sched_out.empty()) save_schedule(tuned.schedule, tp_sched_out);
    for (const auto& w : tuned.schedule.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "fitted " << tuned.fitted.calibrator->kind() << "-p over "
              << tuned.schedule.levels() << " noise levels, saved to " << tp_out << "\n";
  } else if (sweep->parsed()) {
    const SoftmaxRegressionModel m = load_model(sw_model);
    const LabeledDataset test = load_dataset(sw_test, parse_format(sw_test_format));
    std::vector<NamedCalibrator> cals;
    for (const auto& spec : sw_cals) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--cal expects name=path, got '" + spec + "'");
      cals.push_back({spec.substr(0, eq), load_calibrator(spec.substr(eq + 1))});
    }
    SweepSpec spec;
    spec.num_bins = sw_bins;
    spec.seed = sw_seed;
    spec.schedules =
        resolve_schedules(split_list(sw_kinds), sw_gauss_sched, spec.in_family_kinds);
    const EvaluationReport report = run_sweep(m, cals, test, spec);
    emit_report(report,
                sw_fmt == "json" ? ReportFormat::kJson : ReportFormat::kCsv, sw_out);
    std::cout << report.rows.size() << " rows written to " << sw_out << "\n";
  } else if (vs->parsed()) {
    const SoftmaxRegressionModel m = load_model(vs_model);
    const DatasetFormat fmt = parse_format(vs_format);
    const LabeledDataset val = load_dataset(vs_val, fmt);
    const LabeledDataset test = load_dataset(vs_test, fmt);
    std::vector<std::size_t> sizes;
    for (const auto& s : split_list(vs_sizes)) sizes.push_back(std::stoul(s));
    SweepSpec spec;
    spec.num_bins = vs_bins;
    spec.seed = vs_seed;
    spec.schedules =
        resolve_schedules(split_list(vs_pkinds), vs_gauss, spec.in_family_kinds);
    vs_cfg.eval_seed = vs_seed;
    const ValsizeReport report =
        valsize_sweep(m, val, test, sizes, split_list(vs_kinds), vs_cfg, spec);
    emit_valsize_report(report, vs_out);
    std::cout << report.rows.size() << " rows written to " << vs_out << "\n";
  } else if (hist->parsed()) {
    const SoftmaxRegressionModel m = load_model(h_model);
    const LabeledDataset d = load_dataset(h_data, parse_format(h_format));
    CalibratorPtr cal = h_cal.empty() ? std::make_shared<BaseCalibrator>()
                                      : load_calibrator(h_cal);
    emit_histogram(confidence_histogram(m, *cal, d, h_buckets), h_out);
    std::cout << "histogram written to " << h_out << "\n";
  } else if (rep->parsed()) {
    emit_report(load_report_json(r_in), ReportFormat::kCsv, r_out);
    std::cout << "converted " << r_in << " to " << r_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
