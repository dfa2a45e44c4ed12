#include "driftcal/calibrators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "driftcal/metrics.hpp"
#include "driftcal/optim.hpp"

namespace driftcal {

namespace {

constexpr const char* kCalFormat = "drift-calib-cal-v1";

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Equal-width bin index on [0,1]: p in ((b-1)/M, b/M], p = 0 into the first bin.
int bin_index(double p, int m) {
  int b = static_cast<int>(std::ceil(p * m)) - 1;
  return std::clamp(b, 0, m - 1);
}

// Replace the top-class probability by q; remaining mass goes to the other
// classes proportionally to their softmax scores.
ProbVector redistribute_top(const std::vector<double>& logits, double q) {
  ProbVector p = softmax(logits);
  const std::size_t top = argmax(p);
  q = std::clamp(q, 0.0, 1.0);
  const double residual = 1.0 - p[top];
  ProbVector out(p.size());
  if (residual <= 1e-300) {
    const double share = p.size() > 1 ? (1.0 - q) / static_cast<double>(p.size() - 1) : 0.0;
    std::fill(out.begin(), out.end(), share);
  } else {
    for (std::size_t c = 0; c < p.size(); ++c) out[c] = (1.0 - q) * p[c] / residual;
  }
  out[top] = q;
  return out;
}

// Aggregate duplicate scores into (score, mean target, count) triples sorted
// by score, then run PAVA; yields a well-defined monotone step map.
StepMap fit_step_map(std::vector<std::pair<double, double>> pairs) {
  std::sort(pairs.begin(), pairs.end());
  std::vector<double> xs, targets, weights;
  for (const auto& [score, target] : pairs) {
    if (!xs.empty() && xs.back() == score) {
      targets.back() += target;
      weights.back() += 1.0;
    } else {
      xs.push_back(score);
      targets.push_back(target);
      weights.push_back(1.0);
    }
  }
  for (std::size_t i = 0; i < targets.size(); ++i) targets[i] /= weights[i];
  StepMap map;
  map.x = std::move(xs);
  map.y = pava(targets, weights);
  return map;
}

nlohmann::json step_map_to_json(const StepMap& m) {
  return {{"x", m.x}, {"y", m.y}};
}

StepMap step_map_from_json(const nlohmann::json& j) {
  StepMap m;
  m.x = j.at("x").get<std::vector<double>>();
  m.y = j.at("y").get<std::vector<double>>();
  if (m.x.size() != m.y.size() || m.x.empty())
    throw DataError("calibrator: malformed step map");
  return m;
}

}  // namespace

double StepMap::operator()(double s) const {
  // Value of the greatest breakpoint <= s, clamped at the ends.
  auto it = std::upper_bound(x.begin(), x.end(), s);
  if (it == x.begin()) return y.front();
  return y[static_cast<std::size_t>(it - x.begin()) - 1];
}

std::vector<double> pava(const std::vector<double>& values,
                         const std::vector<double>& weights) {
  if (values.size() != weights.size()) throw DataError("pava: length mismatch");
  if (values.empty()) throw DataError("pava: empty input");
  for (double w : weights)
    if (!(w > 0.0)) throw DataError("pava: non-positive weight");

  // Blocks of (mean, weight, extent); merge while adjacent means violate order.
  std::vector<double> mean, weight;
  std::vector<std::size_t> extent;
  for (std::size_t i = 0; i < values.size(); ++i) {
    mean.push_back(values[i]);
    weight.push_back(weights[i]);
    extent.push_back(1);
    while (mean.size() > 1 && mean[mean.size() - 2] >= mean.back()) {
      const double w = weight[weight.size() - 2] + weight.back();
      const double m =
          (mean[mean.size() - 2] * weight[weight.size() - 2] + mean.back() * weight.back()) / w;
      mean.pop_back();
      weight.pop_back();
      extent[extent.size() - 2] += extent.back();
      extent.pop_back();
      mean.back() = m;
      weight.back() = w;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t b = 0; b < mean.size(); ++b)
    out.insert(out.end(), extent[b], mean[b]);
  return out;
}

std::vector<ProbVector> Calibrator::apply_all(const std::vector<LogitRecord>& records) const {
  std::vector<ProbVector> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(apply(r.logits));
  return out;
}

double top_label_margin(const std::vector<double>& logits) {
  const std::size_t top = argmax(logits);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < logits.size(); ++c)
    if (c != top) mx = std::max(mx, logits[c]);
  double sum = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c)
    if (c != top) sum += std::exp(logits[c] - mx);
  return logits[top] - (mx + std::log(sum));
}

double mean_nll(const std::vector<LogitRecord>& records,
                const std::vector<ProbVector>& probs) {
  std::vector<int> labels;
  labels.reserve(records.size());
  for (const auto& r : records) labels.push_back(r.label);
  return nll(probs, labels);
}

// ---------------------------------------------------------------------------
// apply

ProbVector BaseCalibrator::apply(const std::vector<double>& logits) const {
  return softmax(logits);
}

ProbVector TemperatureCalibrator::apply(const std::vector<double>& logits) const {
  std::vector<double> scaled(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) scaled[i] = logits[i] / t_;
  ProbVector p = softmax(scaled);
  // Large T can round distinct logits onto the same quotient; break the
  // resulting exact tie in favor of the raw winner.
  const std::size_t want = argmax(logits);
  if (argmax(p) != want) p[want] = std::nextafter(p[want], 2.0);
  return p;
}

ProbVector EtsCalibrator::apply(const std::vector<double>& logits) const {
  std::vector<double> scaled(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) scaled[i] = logits[i] / t_;
  const ProbVector tempered = softmax(scaled);
  const ProbVector raw = softmax(logits);
  const double uniform = 1.0 / static_cast<double>(logits.size());
  ProbVector out(logits.size());
  double sum = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    // Tiny raw-ordered term keeps argmax exact when the weights collapse onto
    // the uniform component or large T rounds distinct logits together.
    out[c] = w1_ * tempered[c] + w2_ * raw[c] + w3_ * uniform + 1e-12 * raw[c];
    sum += out[c];
  }
  for (double& v : out) v /= sum;
  return out;
}

ProbVector PlattCalibrator::apply(const std::vector<double>& logits) const {
  return redistribute_top(logits, sigmoid(a_ * top_label_margin(logits) + b_));
}

ProbVector HistogramCalibrator::apply(const std::vector<double>& logits) const {
  const ProbVector p = softmax(logits);
  const int m = static_cast<int>(bin_values_.size());
  return redistribute_top(logits, bin_values_[bin_index(p[argmax(p)], m)]);
}

ProbVector IsotonicCalibrator::apply(const std::vector<double>& logits) const {
  if (logits.size() != maps_.size()) throw DataError("isotonic: class count mismatch");
  const ProbVector p = softmax(logits);
  ProbVector out(p.size());
  double sum = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    out[c] = std::clamp(maps_[c](p[c]), 0.0, 1.0);
    sum += out[c];
  }
  if (sum <= 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(p.size()));
    return out;
  }
  for (double& v : out) v /= sum;
  return out;
}

ProbVector IrmCalibrator::apply(const std::vector<double>& logits) const {
  const ProbVector p = softmax(logits);
  ProbVector out(p.size());
  double sum = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    // Tiny score-ordered term keeps argmax exact across pooled plateaus.
    out[c] = std::clamp(map_(p[c]), 0.0, 1.0) + 1e-9 * p[c];
    sum += out[c];
  }
  for (double& v : out) v /= sum;
  return out;
}

ProbVector TsIrCalibrator::apply(const std::vector<double>& logits) const {
  std::vector<double> scaled(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) scaled[i] = logits[i] / t_;
  return isotonic_.apply(scaled);
}

ProbVector PbmcCalibrator::apply(const std::vector<double>& logits) const {
  const double stage1 = sigmoid(a_ * top_label_margin(logits) + b_);
  const int m = static_cast<int>(bin_values_.size());
  return redistribute_top(logits, bin_values_[bin_index(stage1, m)]);
}

// ---------------------------------------------------------------------------
// fitting

FittedCalibrator fit_temperature(const std::vector<LogitRecord>& val) {
  if (val.empty()) throw DataError("fit_temperature: empty validation set");
  auto objective = [&](double t) {
    double sum = 0.0;
    std::vector<double> scaled;
    for (const auto& r : val) {
      scaled.assign(r.logits.size(), 0.0);
      for (std::size_t i = 0; i < r.logits.size(); ++i) scaled[i] = r.logits[i] / t;
      sum += -std::log(std::max(softmax(scaled)[r.label], 1e-300));
    }
    return sum / static_cast<double>(val.size());
  };

  // Degenerate input: NLL is flat in T (e.g. all-constant logit vectors).
  const double f_lo = objective(kTemperatureMin);
  const double f_mid = objective(1.0);
  const double f_hi = objective(kTemperatureMax);
  if (std::max({f_lo, f_mid, f_hi}) - std::min({f_lo, f_mid, f_hi}) < 1e-12) {
    return {std::make_shared<TemperatureCalibrator>(1.0), {f_mid, 0, false}};
  }

  const OptimResult1D r =
      minimize_scalar(objective, kTemperatureMin, kTemperatureMax, 512, 1e-9);
  return {std::make_shared<TemperatureCalibrator>(r.x), {r.fx, r.iterations, true}};
}

FittedCalibrator fit_ets(const std::vector<LogitRecord>& val) {
  if (val.empty()) throw DataError("fit_ets: empty validation set");
  const FittedCalibrator ts = fit_temperature(val);
  const double t = static_cast<const TemperatureCalibrator&>(*ts.calibrator).temperature();

  std::vector<ProbVector> tempered(val.size()), raw(val.size());
  for (std::size_t i = 0; i < val.size(); ++i) {
    std::vector<double> scaled(val[i].logits.size());
    for (std::size_t c = 0; c < scaled.size(); ++c) scaled[c] = val[i].logits[c] / t;
    tempered[i] = softmax(scaled);
    raw[i] = softmax(val[i].logits);
  }
  const double uniform = 1.0 / static_cast<double>(val.front().logits.size());

  auto nll_of = [&](double w1, double w2, double w3) {
    double sum = 0.0;
    for (std::size_t i = 0; i < val.size(); ++i) {
      const int y = val[i].label;
      const double q = w1 * tempered[i][y] + w2 * raw[i][y] + w3 * uniform;
      sum += -std::log(std::max(q, 1e-300));
    }
    return sum / static_cast<double>(val.size());
  };

  if (!ts.report.converged) {
    return {std::make_shared<EtsCalibrator>(t, 1.0, 0.0, 0.0),
            {nll_of(1.0, 0.0, 0.0), 0, false}};
  }

  // Simplex weights via softmax of 3 unconstrained reals.
  auto weights_of = [](const std::vector<double>& u) {
    const double mx = std::max({u[0], u[1], u[2]});
    double e0 = std::exp(u[0] - mx), e1 = std::exp(u[1] - mx), e2 = std::exp(u[2] - mx);
    const double s = e0 + e1 + e2;
    return std::array<double, 3>{e0 / s, e1 / s, e2 / s};
  };
  auto objective = [&](const std::vector<double>& u) {
    const auto w = weights_of(u);
    return nll_of(w[0], w[1], w[2]);
  };

  const OptimResult r = nelder_mead(objective, {1.0, 0.0, 0.0}, 1.0, 1e-10, 400);
  auto w = weights_of(r.x);
  double best = r.fx;
  // Pure TS is a feasible point of the weight space; never do worse.
  const double ts_nll = nll_of(1.0, 0.0, 0.0);
  if (ts_nll < best) {
    w = {1.0, 0.0, 0.0};
    best = ts_nll;
  }
  return {std::make_shared<EtsCalibrator>(t, w[0], w[1], w[2]),
          {best, r.iterations, r.converged}};
}

FittedCalibrator fit_platt(const std::vector<LogitRecord>& val) {
  if (val.empty()) throw DataError("fit_platt: empty validation set");
  const std::size_t n = val.size();
  std::vector<double> margin(n);
  std::vector<double> target(n);
  std::size_t num_correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    margin[i] = top_label_margin(val[i].logits);
    const bool correct = static_cast<int>(argmax(val[i].logits)) == val[i].label;
    target[i] = correct ? 1.0 : 0.0;
    num_correct += correct;
  }
  const bool separable_degenerate = num_correct == 0 || num_correct == n;

  double a = 1.0, b = 0.0;
  auto objective = [&](double aa, double bb) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(aa * margin[i] + bb);
      sum += -(target[i] * std::log(std::max(p, 1e-300)) +
               (1.0 - target[i]) * std::log(std::max(1.0 - p, 1e-300)));
    }
    return sum / static_cast<double>(n);
  };

  int iter = 0;
  bool converged = false;
  for (; iter < 200; ++iter) {
    double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(a * margin[i] + b);
      const double d = p - target[i];
      const double v = std::max(p * (1.0 - p), 1e-12);
      g0 += d * margin[i];
      g1 += d;
      h00 += v * margin[i] * margin[i];
      h01 += v * margin[i];
      h11 += v;
    }
    g0 /= n; g1 /= n; h00 /= n; h01 /= n; h11 /= n;
    const double det = h00 * h11 - h01 * h01;
    if (std::abs(det) < 1e-300) break;
    double da = (h11 * g0 - h01 * g1) / det;
    double db = (h00 * g1 - h01 * g0) / det;
    // Damped step to keep the separable case bounded.
    const double f0 = objective(a, b);
    double scale = 1.0;
    while (scale > 1e-6 && objective(a - scale * da, b - scale * db) > f0) scale *= 0.5;
    a -= scale * da;
    b -= scale * db;
    a = std::clamp(a, -100.0, 100.0);
    b = std::clamp(b, -100.0, 100.0);
    if (std::hypot(scale * da, scale * db) < 1e-12) {
      converged = true;
      break;
    }
  }

  return {std::make_shared<PlattCalibrator>(a, b),
          {objective(a, b), iter, converged && !separable_degenerate}};
}

namespace {

// Equal-width binning of (confidence, value) pairs; empty bins fall back to
// the bin midpoint.
std::vector<double> bin_means(const std::vector<std::pair<double, double>>& pairs,
                              int num_bins) {
  std::vector<double> sum(num_bins, 0.0);
  std::vector<std::size_t> count(num_bins, 0);
  for (const auto& [conf, value] : pairs) {
    const int b = bin_index(conf, num_bins);
    sum[b] += value;
    count[b] += 1;
  }
  std::vector<double> q(num_bins);
  for (int b = 0; b < num_bins; ++b)
    q[b] = count[b] > 0 ? sum[b] / static_cast<double>(count[b])
                        : (b + 0.5) / static_cast<double>(num_bins);
  return q;
}

}  // namespace

FittedCalibrator fit_histogram_binning(const std::vector<LogitRecord>& val, int num_bins) {
  if (val.empty()) throw DataError("fit_histogram_binning: empty validation set");
  if (num_bins < 1) throw ConfigError("fit_histogram_binning: M must be >= 1");
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(val.size());
  for (const auto& r : val) {
    const ProbVector p = softmax(r.logits);
    const std::size_t top = argmax(p);
    pairs.emplace_back(p[top], static_cast<int>(top) == r.label ? 1.0 : 0.0);
  }
  std::vector<double> q = bin_means(pairs, num_bins);
  double sq = 0.0;
  for (const auto& [conf, correct] : pairs) {
    const double diff = q[bin_index(conf, num_bins)] - correct;
    sq += diff * diff;
  }
  return {std::make_shared<HistogramCalibrator>(std::move(q)),
          {sq / static_cast<double>(val.size()), 1, true}};
}

namespace {

std::vector<StepMap> fit_per_class_maps(const std::vector<LogitRecord>& val) {
  const std::size_t c = val.front().logits.size();
  std::vector<StepMap> maps;
  maps.reserve(c);
  for (std::size_t cls = 0; cls < c; ++cls) {
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(val.size());
    for (const auto& r : val) {
      const ProbVector p = softmax(r.logits);
      pairs.emplace_back(p[cls], r.label == static_cast<int>(cls) ? 1.0 : 0.0);
    }
    maps.push_back(fit_step_map(std::move(pairs)));
  }
  return maps;
}

}  // namespace

FittedCalibrator fit_isotonic(const std::vector<LogitRecord>& val) {
  if (val.empty()) throw DataError("fit_isotonic: empty validation set");
  auto cal = std::make_shared<IsotonicCalibrator>(fit_per_class_maps(val));
  const double obj = mean_nll(val, cal->apply_all(val));
  return {cal, {obj, 1, true}};
}

FittedCalibrator fit_irm(const std::vector<LogitRecord>& val) {
  if (val.empty()) throw DataError("fit_irm: empty validation set");
  std::vector<std::pair<double, double>> pooled;
  pooled.reserve(val.size() * val.front().logits.size());
  for (const auto& r : val) {
    const ProbVector p = softmax(r.logits);
    for (std::size_t c = 0; c < p.size(); ++c)
      pooled.emplace_back(p[c], r.label == static_cast<int>(c) ? 1.0 : 0.0);
  }
  auto cal = std::make_shared<IrmCalibrator>(fit_step_map(std::move(pooled)));
  const double obj = mean_nll(val, cal->apply_all(val));
  return {cal, {obj, 1, true}};
}

FittedCalibrator fit_ts_ir(const std::vector<LogitRecord>& val) {
  if (val.empty()) throw DataError("fit_ts_ir: empty validation set");
  const FittedCalibrator ts = fit_temperature(val);
  const double t = static_cast<const TemperatureCalibrator&>(*ts.calibrator).temperature();
  std::vector<LogitRecord> scaled = val;
  for (auto& r : scaled)
    for (double& z : r.logits) z /= t;
  auto cal = std::make_shared<TsIrCalibrator>(
      t, IsotonicCalibrator(fit_per_class_maps(scaled)));
  const double obj = mean_nll(val, cal->apply_all(val));
  return {cal, {obj, ts.report.iterations, ts.report.converged}};
}

FittedCalibrator fit_pbmc(const std::vector<LogitRecord>& val, int num_bins) {
  if (val.empty()) throw DataError("fit_pbmc: empty validation set");
  if (num_bins < 1) throw ConfigError("fit_pbmc: M must be >= 1");
  const FittedCalibrator platt = fit_platt(val);
  const auto& ps = static_cast<const PlattCalibrator&>(*platt.calibrator);
  // Scaling-binning: bin value is the mean stage-1 confidence of the bin.
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(val.size());
  for (const auto& r : val) {
    const double q1 = sigmoid(ps.a() * top_label_margin(r.logits) + ps.b());
    pairs.emplace_back(q1, q1);
  }
  auto cal = std::make_shared<PbmcCalibrator>(ps.a(), ps.b(), bin_means(pairs, num_bins));
  const double obj = mean_nll(val, cal->apply_all(val));
  return {cal, {obj, platt.report.iterations, platt.report.converged}};
}

FittedCalibrator fit_calibrator(const std::string& kind,
                                const std::vector<LogitRecord>& val, int num_bins) {
  if (kind == "ts") return fit_temperature(val);
  if (kind == "ets") return fit_ets(val);
  if (kind == "platt") return fit_platt(val);
  if (kind == "hb") return fit_histogram_binning(val, num_bins);
  if (kind == "ir") return fit_isotonic(val);
  if (kind == "irm") return fit_irm(val);
  if (kind == "ts-ir") return fit_ts_ir(val);
  if (kind == "pbmc") return fit_pbmc(val, num_bins);
  throw ConfigError("unknown calibrator kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// serialization

nlohmann::json BaseCalibrator::to_json() const {
  return {{"format", kCalFormat}, {"kind", kind()}};
}

nlohmann::json TemperatureCalibrator::to_json() const {
  return {{"format", kCalFormat}, {"kind", kind()}, {"T", t_}};
}

nlohmann::json EtsCalibrator::to_json() const {
  return {{"format", kCalFormat}, {"kind", kind()},
          {"T", t_}, {"w1", w1_}, {"w2", w2_}, {"w3", w3_}};
}

nlohmann::json PlattCalibrator::to_json() const {
  return {{"format", kCalFormat}, {"kind", kind()}, {"a", a_}, {"b", b_}};
}

nlohmann::json HistogramCalibrator::to_json() const {
  return {{"format", kCalFormat}, {"kind", kind()}, {"bin_values", bin_values_}};
}

nlohmann::json IsotonicCalibrator::to_json() const {
  nlohmann::json maps = nlohmann::json::array();
  for (const auto& m : maps_) maps.push_back(step_map_to_json(m));
  return {{"format", kCalFormat}, {"kind", kind()}, {"maps", maps}};
}

nlohmann::json IrmCalibrator::to_json() const {
  return {{"format", kCalFormat}, {"kind", kind()}, {"map", step_map_to_json(map_)}};
}

nlohmann::json TsIrCalibrator::to_json() const {
  nlohmann::json maps = nlohmann::json::array();
  for (const auto& m : isotonic_.maps()) maps.push_back(step_map_to_json(m));
  return {{"format", kCalFormat}, {"kind", kind()}, {"T", t_}, {"maps", maps}};
}

nlohmann::json PbmcCalibrator::to_json() const {
  return {{"format", kCalFormat}, {"kind", kind()},
          {"a", a_}, {"b", b_}, {"bin_values", bin_values_}};
}

CalibratorPtr calibrator_from_json(const nlohmann::json& j) {
  if (!j.contains("format") || j["format"] != kCalFormat)
    throw DataError("calibrator: unsupported format");
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "base") return std::make_shared<BaseCalibrator>();
    if (kind == "temperature")
      return std::make_shared<TemperatureCalibrator>(j.at("T").get<double>());
    if (kind == "ets")
      return std::make_shared<EtsCalibrator>(j.at("T").get<double>(),
                                             j.at("w1").get<double>(),
                                             j.at("w2").get<double>(),
                                             j.at("w3").get<double>());
    if (kind == "platt")
      return std::make_shared<PlattCalibrator>(j.at("a").get<double>(),
                                               j.at("b").get<double>());
    if (kind == "histogram")
      return std::make_shared<HistogramCalibrator>(
          j.at("bin_values").get<std::vector<double>>());
    if (kind == "isotonic" || kind == "ts-ir") {
      std::vector<StepMap> maps;
      for (const auto& m : j.at("maps")) maps.push_back(step_map_from_json(m));
      if (kind == "isotonic") return std::make_shared<IsotonicCalibrator>(std::move(maps));
      return std::make_shared<TsIrCalibrator>(j.at("T").get<double>(),
                                              IsotonicCalibrator(std::move(maps)));
    }
    if (kind == "irm")
      return std::make_shared<IrmCalibrator>(step_map_from_json(j.at("map")));
    if (kind == "pbmc")
      return std::make_shared<PbmcCalibrator>(
          j.at("a").get<double>(), j.at("b").get<double>(),
          j.at("bin_values").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("calibrator: ") + e.what());
  }
  throw DataError("calibrator: unknown kind '" + kind + "'");
}

void save_calibrator(const Calibrator& cal, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << cal.to_json().dump(2) << '\n';
}

CalibratorPtr load_calibrator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return calibrator_from_json(j);
}

}  // namespace driftcal
