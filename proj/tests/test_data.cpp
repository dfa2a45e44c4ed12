#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "driftcal/data.hpp"

using namespace driftcal;

namespace {

std::string temp_path(const std::string& name) {
  return std::string("/tmp/driftcal_test_") + name;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

LabeledDataset random_dataset(std::mt19937_64& rng, std::size_t n, int c, std::size_t dim) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> lab(0, c - 1);
  LabeledDataset d;
  d.num_classes = c;
  for (std::size_t i = 0; i < n; ++i) {
    SampleGrid g;
    g.shape = {1, 1, dim};
    g.label = lab(rng);
    for (std::size_t j = 0; j < dim; ++j) g.values.push_back(static_cast<float>(unif(rng)));
    d.samples.push_back(std::move(g));
  }
  return d;
}

}  // namespace

TEST_CASE("softmax basic values") {
  auto p = softmax({0.0, 0.0});
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));

  p = softmax({1000.0, 0.0});
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::isfinite(p[0]));

  p = softmax({1.0, 0.0, -1.0});
  CHECK(p[0] == doctest::Approx(0.66524).epsilon(1e-5));
  CHECK(p[1] == doctest::Approx(0.24473).epsilon(1e-5));
  CHECK(p[2] == doctest::Approx(0.09003).epsilon(1e-5));
}

TEST_CASE("softmax rejects non-finite input") {
  CHECK_THROWS_AS(softmax({1.0, std::nan("")}), NumericError);
  CHECK_THROWS_AS(softmax({std::numeric_limits<double>::infinity()}), NumericError);
}

TEST_CASE("softmax properties over random vectors") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1e3, 1e3);
  for (int it = 0; it < 300; ++it) {
    const std::size_t c = 2 + rng() % 9;
    std::vector<double> z(c);
    for (auto& v : z) v = unif(rng);
    const ProbVector p = softmax(z);
    CHECK(is_prob_vector(p));
    CHECK(argmax(p) == argmax(z));
  }
}

TEST_CASE("argmax ties break to lowest index") {
  CHECK(argmax({1.0, 1.0, 0.0}) == 0);
  CHECK(argmax({0.0, 2.0, 2.0}) == 1);
}

TEST_CASE("dataset csv loading") {
  const auto path = temp_path("ds.csv");
  write_file(path, "f0,f1,label\n0.1,0.2,0\n0.3,0.4,1\n0.5,0.6,0\n");
  const LabeledDataset d = load_dataset(path, DatasetFormat::kCsv);
  CHECK(d.size() == 3);
  CHECK(d.shape() == GridShape{1, 1, 2});
  CHECK(d.num_classes == 2);
  CHECK(d.samples[1].values[0] == doctest::Approx(0.3f));
  CHECK(d.samples[1].label == 1);
  std::remove(path.c_str());
}

TEST_CASE("dataset csv error paths") {
  const auto path = temp_path("ds_bad.csv");

  write_file(path, "");
  CHECK_THROWS_WITH_AS(load_dataset(path, DatasetFormat::kCsv), "empty dataset", DataError);

  write_file(path, "f0,f1,label\n");
  CHECK_THROWS_WITH_AS(load_dataset(path, DatasetFormat::kCsv), "empty dataset", DataError);

  write_file(path, "f0,f1,label\n0.1,0.2\n");
  CHECK_THROWS_AS(load_dataset(path, DatasetFormat::kCsv), DataError);

  write_file(path, "f0,f1,label\n0.1,x,0\n");
  CHECK_THROWS_AS(load_dataset(path, DatasetFormat::kCsv), DataError);

  write_file(path, "f0,f1,label\n0.1,0.2,-1\n");
  CHECK_THROWS_AS(load_dataset(path, DatasetFormat::kCsv), DataError);

  std::remove(path.c_str());
}

TEST_CASE("raw-binary round-trip is bit-exact") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 20; ++it) {
    const LabeledDataset d = random_dataset(rng, 5 + rng() % 20, 2 + rng() % 5, 1 + rng() % 8);
    const auto path = temp_path("ds.bin");
    write_dataset(d, path, DatasetFormat::kRawBinary);
    const LabeledDataset back = load_dataset(path, DatasetFormat::kRawBinary);
    REQUIRE(back.size() == d.size());
    CHECK(back.num_classes == d.num_classes);
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(back.samples[i].label == d.samples[i].label);
      CHECK(back.samples[i].values == d.samples[i].values);
    }
    std::remove(path.c_str());
  }
}

TEST_CASE("raw-binary rejects corrupt input") {
  const auto path = temp_path("ds_corrupt.bin");
  write_file(path, "NOPE");
  CHECK_THROWS_AS(load_dataset(path, DatasetFormat::kRawBinary), DataError);
  write_file(path, "DCAL\x01");
  CHECK_THROWS_AS(load_dataset(path, DatasetFormat::kRawBinary), DataError);
  std::remove(path.c_str());
}

TEST_CASE("logit csv loading") {
  const auto path = temp_path("lg.csv");
  write_file(path, "z0,z1,z2,label\n0.3,1.2,-0.5,2\n");
  const auto records = load_logits(path);
  REQUIRE(records.size() == 1);
  CHECK(records[0].logits == std::vector<double>{0.3, 1.2, -0.5});
  CHECK(records[0].label == 2);

  write_file(path, "z0,z1,z2,label\n0.3,1.2,2\n");
  CHECK_THROWS_AS(load_logits(path), DataError);

  write_file(path, "z0,z1,z2,label\n0.3,abc,-0.5,2\n");
  CHECK_THROWS_AS(load_logits(path), DataError);
  std::remove(path.c_str());
}

TEST_CASE("dataset validate catches label and shape issues") {
  std::mt19937_64 rng(3);
  LabeledDataset d = random_dataset(rng, 4, 3, 2);
  d.samples[2].label = 3;
  CHECK_THROWS_AS(d.validate(), DataError);
  d.samples[2].label = 0;
  d.samples[1].shape = {1, 1, 3};
  d.samples[1].values.push_back(0.0f);
  CHECK_THROWS_AS(d.validate(), DataError);
}
