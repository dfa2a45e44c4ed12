#include "driftcal/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

namespace driftcal {

namespace {

constexpr char kRawMagic[4] = {'D', 'C', 'A', 'L'};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": non-numeric " + what + " '" + s + "'");
  }
}

int parse_label(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": bad label '" + s + "'");
  }
}

template <typename T>
void write_le(std::ostream& os, T v) {
  static_assert(sizeof(T) == 4);
  unsigned char buf[4];
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(buf), 4);
}

template <typename T>
T read_le(std::istream& is, const std::string& what) {
  unsigned char buf[4];
  if (!is.read(reinterpret_cast<char*>(buf), 4))
    throw DataError("truncated raw-binary file while reading " + what);
  std::uint32_t u = 0;
  for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  T v;
  std::memcpy(&v, &u, 4);
  return v;
}

}  // namespace

void LabeledDataset::validate() const {
  if (samples.empty()) throw DataError("empty dataset");
  if (num_classes < 2) throw DataError("num_classes must be >= 2");
  const GridShape s = samples.front().shape;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& g = samples[i];
    if (!(g.shape == s))
      throw DataError("sample " + std::to_string(i) + ": shape mismatch");
    if (g.values.size() != s.size())
      throw DataError("sample " + std::to_string(i) + ": value count mismatch");
    if (g.label < 0 || g.label >= num_classes)
      throw DataError("sample " + std::to_string(i) + ": label " + std::to_string(g.label) +
                      " out of range [0," + std::to_string(num_classes) + ")");
    for (float v : g.values)
      if (!std::isfinite(v))
        throw DataError("sample " + std::to_string(i) + ": non-finite value");
  }
}

ProbVector softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw NumericError("softmax: empty logits");
  double mx = logits[0];
  for (double z : logits) {
    if (!std::isfinite(z)) throw NumericError("softmax: non-finite logit");
    mx = std::max(mx, z);
  }
  ProbVector p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

bool is_prob_vector(const ProbVector& p, double tol) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0 + tol)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

namespace {

LabeledDataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty dataset");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "label")
    throw DataError(path + ": expected header f0,...,label");
  const std::size_t dim = header.size() - 1;

  LabeledDataset d;
  int max_label = -1;
  std::size_t line_no = 1;
  bool warned_range = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != dim + 1)
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(dim + 1) + " fields, got " + std::to_string(fields.size()));
    SampleGrid g;
    g.shape = GridShape{1, 1, dim};
    g.values.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      double v = parse_double(fields[j], line_no, "feature");
      if ((v < 0.0 || v > 1.0) && !warned_range) {
        std::cerr << "warning: " << path << " line " << line_no
                  << ": feature outside [0,1]; perturbation clipping still applies\n";
        warned_range = true;
      }
      g.values[j] = static_cast<float>(v);
    }
    g.label = parse_label(fields[dim], line_no);
    max_label = std::max(max_label, g.label);
    d.samples.push_back(std::move(g));
  }
  if (d.samples.empty()) throw DataError("empty dataset");
  d.num_classes = std::max(2, max_label + 1);
  d.validate();
  return d;
}

LabeledDataset load_dataset_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kRawMagic, 4) != 0)
    throw DataError(path + ": bad magic, not a DCAL file");
  const auto n = read_le<std::uint32_t>(in, "N");
  const auto h = read_le<std::uint32_t>(in, "H");
  const auto w = read_le<std::uint32_t>(in, "W");
  const auto k = read_le<std::uint32_t>(in, "K");
  const auto c = read_le<std::uint32_t>(in, "C");
  if (n == 0) throw DataError("empty dataset");
  LabeledDataset d;
  d.num_classes = static_cast<int>(c);
  const GridShape shape{h, w, k};
  d.samples.resize(n);
  for (auto& g : d.samples) {
    g.shape = shape;
    g.values.resize(shape.size());
    for (auto& v : g.values) v = read_le<float>(in, "value");
  }
  for (auto& g : d.samples) g.label = static_cast<int>(read_le<std::uint32_t>(in, "label"));
  d.validate();
  return d;
}

}  // namespace

LabeledDataset load_dataset(const std::string& path, DatasetFormat format) {
  return format == DatasetFormat::kCsv ? load_dataset_csv(path) : load_dataset_raw(path);
}

void write_dataset(const LabeledDataset& d, const std::string& path, DatasetFormat format) {
  d.validate();
  if (format == DatasetFormat::kCsv) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    const std::size_t dim = d.input_dim();
    for (std::size_t j = 0; j < dim; ++j) out << 'f' << j << ',';
    out << "label\n";
    out.precision(9);
    for (const auto& g : d.samples) {
      for (float v : g.values) out << v << ',';
      out << g.label << '\n';
    }
  } else {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out.write(kRawMagic, 4);
    const GridShape s = d.shape();
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.size()));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.h));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.w));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.k));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.num_classes));
    for (const auto& g : d.samples)
      for (float v : g.values) write_le<float>(out, v);
    for (const auto& g : d.samples)
      write_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.label));
  }
}

std::vector<LogitRecord> load_logits(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty logit file");
  auto header = split_csv_line(line);
  if (header.size() < 3 || header.back() != "label")
    throw DataError(path + ": expected header z0,...,label");
  const std::size_t c = header.size() - 1;

  std::vector<LogitRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != c + 1)
      throw DataError("line " + std::to_string(line_no) + ": ragged row, expected " +
                      std::to_string(c + 1) + " fields");
    LogitRecord r;
    r.logits.resize(c);
    for (std::size_t j = 0; j < c; ++j) r.logits[j] = parse_double(fields[j], line_no, "logit");
    r.label = parse_label(fields[c], line_no);
    if (r.label < 0 || r.label >= static_cast<int>(c))
      throw DataError("line " + std::to_string(line_no) + ": label out of range");
    records.push_back(std::move(r));
  }
  if (records.empty()) throw DataError("empty logit file");
  return records;
}

void write_logits(const std::vector<LogitRecord>& records, const std::string& path) {
  if (records.empty()) throw DataError("no logit records to write");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  const std::size_t c = records.front().logits.size();
  for (std::size_t j = 0; j < c; ++j) out << 'z' << j << ',';
  out << "label\n";
  out.precision(17);
  for (const auto& r : records) {
    if (r.logits.size() != c) throw DataError("inconsistent logit dimensions");
    for (double z : r.logits) out << z << ',';
    out << r.label << '\n';
  }
}

}  // namespace driftcal
