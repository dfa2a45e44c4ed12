#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "driftcal/errors.hpp"

namespace driftcal {

struct GridShape {
  std::size_t h = 1;
  std::size_t w = 1;
  std::size_t k = 1;

  std::size_t size() const { return h * w * k; }
  bool operator==(const GridShape&) const = default;
};

// One input sample: dense H x W x K grid with entries in [0,1] plus its label.
struct SampleGrid {
  std::vector<float> values;  // row-major, channel innermost
  GridShape shape;
  int label = 0;

  float at(std::size_t r, std::size_t c, std::size_t ch) const {
    return values[(r * shape.w + c) * shape.k + ch];
  }
  float& at(std::size_t r, std::size_t c, std::size_t ch) {
    return values[(r * shape.w + c) * shape.k + ch];
  }
};

struct LabeledDataset {
  std::vector<SampleGrid> samples;
  int num_classes = 0;

  std::size_t size() const { return samples.size(); }
  GridShape shape() const { return samples.empty() ? GridShape{} : samples.front().shape; }
  std::size_t input_dim() const { return shape().size(); }

  // Throws DataError when empty, labels out of range or shapes differ.
  void validate() const;
};

struct LogitRecord {
  std::vector<double> logits;
  int label = 0;
};

using ProbVector = std::vector<double>;

// Stable softmax via max subtraction. Throws NumericError on non-finite input.
ProbVector softmax(const std::vector<double>& logits);

// Index of the largest entry, ties broken by lowest index.
std::size_t argmax(const std::vector<double>& v);

bool is_prob_vector(const ProbVector& p, double tol = 1e-9);

enum class DatasetFormat { kCsv, kRawBinary };

LabeledDataset load_dataset(const std::string& path, DatasetFormat format);
void write_dataset(const LabeledDataset& d, const std::string& path, DatasetFormat format);

std::vector<LogitRecord> load_logits(const std::string& path);
void write_logits(const std::vector<LogitRecord>& records, const std::string& path);

}  // namespace driftcal
