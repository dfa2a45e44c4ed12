#include <doctest.h>

#include <cmath>
#include <random>

#include "driftcal/metrics.hpp"

using namespace driftcal;

namespace {

PredictionSet make_set(std::vector<double> conf, std::vector<bool> correct) {
  PredictionSet ps;
  ps.confidence = std::move(conf);
  ps.correct = std::move(correct);
  return ps;
}

PredictionSet random_set(std::mt19937_64& rng, std::size_t n, int c) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PredictionSet ps;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> p(c);
    double sum = 0.0;
    for (auto& v : p) {
      v = unif(rng) + 1e-6;
      sum += v;
    }
    for (auto& v : p) v /= sum;
    const std::size_t top = argmax(p);
    const int label = static_cast<int>(rng() % c);
    ps.confidence.push_back(p[top]);
    ps.correct.push_back(static_cast<int>(top) == label);
    ps.probs.push_back(std::move(p));
    ps.labels.push_back(label);
  }
  return ps;
}

}  // namespace

TEST_CASE("reliability bins hand case") {
  const auto ps = make_set({0.3, 0.6, 0.8, 0.9}, {true, false, true, true});
  const ReliabilityBins rb = reliability_bins(ps, 2);
  REQUIRE(rb.bins.size() == 2);
  CHECK(rb.bins[0].count == 1);
  CHECK(rb.bins[0].mean_confidence == doctest::Approx(0.3));
  CHECK(rb.bins[0].mean_accuracy == doctest::Approx(1.0));
  CHECK(rb.bins[1].count == 3);
  CHECK(rb.bins[1].mean_confidence == doctest::Approx(0.76667).epsilon(1e-4));
  CHECK(rb.bins[1].mean_accuracy == doctest::Approx(0.66667).epsilon(1e-4));
}

TEST_CASE("reliability bin boundaries") {
  auto rb = reliability_bins(make_set({1.0}, {true}), 10);
  CHECK(rb.bins[9].count == 1);
  rb = reliability_bins(make_set({0.0}, {false}), 10);
  CHECK(rb.bins[0].count == 1);
  // p = m/M lands in bin m (half-open on the left).
  rb = reliability_bins(make_set({0.5}, {true}), 2);
  CHECK(rb.bins[0].count == 1);
  CHECK_THROWS_AS(reliability_bins(PredictionSet{}, 10), DataError);
}

TEST_CASE("ece hand case and extremes") {
  const auto ps = make_set({0.3, 0.6, 0.8, 0.9}, {true, false, true, true});
  CHECK(ece(ps, 2) == doctest::Approx(0.25).epsilon(1e-12));

  // conf == acc in every bin.
  const auto perfect = make_set({0.5, 0.5}, {true, false});
  CHECK(ece(perfect, 1) == doctest::Approx(0.0).epsilon(1e-15));

  const auto wrong = make_set({1.0, 1.0, 1.0}, {false, false, false});
  CHECK(ece(wrong, 15) == doctest::Approx(1.0));
}

TEST_CASE("debiased ece") {
  // Single bin, acc 0.5, conf 0.5, count 2: correction dominates, clipped to 0.
  const auto ps = make_set({0.5, 0.5}, {true, false});
  CHECK(debiased_ece(ps, 1) == doctest::Approx(0.0));

  // Zero bin variance (acc in {0,1}) means debiased equals the plugin value.
  const auto sure = make_set({0.9, 0.95, 0.2, 0.1}, {true, true, false, false});
  CHECK(debiased_ece(sure, 2) == doctest::Approx(plugin_l2_ece(sure, 2)));

  std::mt19937_64 rng(5);
  for (int it = 0; it < 300; ++it) {
    const auto r = random_set(rng, 5 + rng() % 100, 2 + rng() % 8);
    CHECK(debiased_ece(r, 15) <= plugin_l2_ece(r, 15) + 1e-12);
  }
}

TEST_CASE("nll") {
  CHECK(nll({{1.0, 0.0}, {0.0, 1.0}}, {0, 1}) == doctest::Approx(0.0));
  std::vector<ProbVector> uniform(3, ProbVector(10, 0.1));
  CHECK(nll(uniform, {0, 4, 9}) == doctest::Approx(std::log(10.0)));
  // Exact zero hits the floor instead of infinity.
  const double v = nll({{0.0, 1.0}}, {0});
  CHECK(v == doctest::Approx(-std::log(1e-12)));
  CHECK(std::isfinite(v));
  CHECK_THROWS_AS(nll({{0.5, 0.5}}, {0, 1}), DataError);
}

TEST_CASE("brier") {
  CHECK(brier({{1.0, 0.0}}, {0}) == doctest::Approx(0.0));
  CHECK(brier({{0.5, 0.5}}, {1}) == doctest::Approx(0.5));
  CHECK(brier({{0.7, 0.3}}, {1}) == doctest::Approx(0.98));
}

TEST_CASE("predictive entropy") {
  CHECK(predictive_entropy({{1.0, 0.0, 0.0}}) == doctest::Approx(0.0));
  CHECK(predictive_entropy({ProbVector(10, 0.1)}) == doctest::Approx(std::log(10.0)));
  CHECK(predictive_entropy({{0.5, 0.25, 0.25}}) == doctest::Approx(1.039721).epsilon(1e-5));
}

TEST_CASE("micro averaged ece pooling") {
  std::mt19937_64 rng(17);
  const auto ps = random_set(rng, 200, 5);
  CHECK(micro_averaged_ece({ps}, 15) == doctest::Approx(ece(ps, 15)));
  CHECK(micro_averaged_ece({ps, ps}, 15) == doctest::Approx(ece(ps, 15)));
  // k copies leave the pooled ECE unchanged.
  CHECK(micro_averaged_ece({ps, ps, ps, ps}, 15) == doctest::Approx(ece(ps, 15)));

  // Disjoint-bin levels against a single-pool oracle.
  const auto low = make_set({0.1, 0.2}, {false, false});
  const auto high = make_set({0.9, 0.95}, {true, true});
  PredictionSet pooled = low;
  pooled.append(high);
  CHECK(micro_averaged_ece({low, high}, 4) == doctest::Approx(ece(pooled, 4)));
}

TEST_CASE("metric ranges and permutation invariance") {
  std::mt19937_64 rng(23);
  for (int it = 0; it < 250; ++it) {
    auto ps = random_set(rng, 3 + rng() % 60, 2 + rng() % 9);
    const int c = static_cast<int>(ps.probs.front().size());
    const double e = ece(ps, 15);
    CHECK(e >= 0.0);
    CHECK(e <= 1.0);
    CHECK(nll(ps.probs, ps.labels) >= 0.0);
    const double b = brier(ps.probs, ps.labels);
    CHECK(b >= 0.0);
    CHECK(b <= 2.0);
    const double h = predictive_entropy(ps.probs);
    CHECK(h >= -1e-12);
    CHECK(h <= std::log(static_cast<double>(c)) + 1e-12);

    // Permuting samples leaves ECE unchanged.
    PredictionSet shuffled;
    std::vector<std::size_t> order(ps.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      shuffled.confidence.push_back(ps.confidence[i]);
      shuffled.correct.push_back(ps.correct[i]);
    }
    CHECK(ece(shuffled, 15) == doctest::Approx(e).epsilon(1e-12));
  }
}

TEST_CASE("ece is zero when bins are internally calibrated") {
  // In each bin the empirical accuracy equals the mean confidence exactly.
  PredictionSet ps;
  // Bin (0.4, 0.6]: 4 samples at 0.5, 2 correct. Bin (0.6, 0.8]: 4 at 0.75, 3 correct.
  for (int i = 0; i < 4; ++i) {
    ps.confidence.push_back(0.5);
    ps.correct.push_back(i < 2);
  }
  for (int i = 0; i < 4; ++i) {
    ps.confidence.push_back(0.75);
    ps.correct.push_back(i < 3);
  }
  CHECK(ece(ps, 5) == doctest::Approx(0.0).epsilon(1e-15));
}
