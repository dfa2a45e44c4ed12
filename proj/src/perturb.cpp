#include "driftcal/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace driftcal {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t index) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index)));
}

float clip01(double v) {
  return static_cast<float>(std::clamp(v, 0.0, 1.0));
}

double identity_param(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::kZoomX:
    case PerturbationKind::kZoomY:
    case PerturbationKind::kZoomXY:
    case PerturbationKind::kContrast:
      return 1.0;
    default:
      return 0.0;
  }
}

// Inverse-mapped affine warp: for each output pixel find the source pixel,
// nearest neighbor, zero fill outside the grid. Coordinates are (x=col,
// y=row) about the grid center; with y pointing down a positive rotation
// angle turns the content clockwise.
SampleGrid warp(const SampleGrid& in,
                double m00, double m01, double m10, double m11,
                double dx, double dy, bool degenerate) {
  SampleGrid out = in;
  const std::size_t h = in.shape.h, w = in.shape.w, k = in.shape.k;
  const double cx = (static_cast<double>(w) - 1.0) / 2.0;
  const double cy = (static_cast<double>(h) - 1.0) / 2.0;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      bool inside = false;
      long sr = 0, sc = 0;
      if (!degenerate) {
        const double x = static_cast<double>(c) - cx;
        const double y = static_cast<double>(r) - cy;
        const double sx = m00 * x + m01 * y + dx + cx;
        const double sy = m10 * x + m11 * y + dy + cy;
        sc = std::lround(sx);
        sr = std::lround(sy);
        inside = sr >= 0 && sr < static_cast<long>(h) && sc >= 0 && sc < static_cast<long>(w);
      }
      for (std::size_t ch = 0; ch < k; ++ch)
        out.at(r, c, ch) = inside
            ? in.at(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc), ch)
            : 0.0f;
    }
  }
  return out;
}

}  // namespace

PerturbationKind perturbation_kind_from_string(const std::string& name) {
  if (name == "gaussian") return PerturbationKind::kGaussianNoise;
  if (name == "rot_left") return PerturbationKind::kRotateLeft;
  if (name == "rot_right") return PerturbationKind::kRotateRight;
  if (name == "shear") return PerturbationKind::kShear;
  if (name == "xshift") return PerturbationKind::kShiftX;
  if (name == "yshift") return PerturbationKind::kShiftY;
  if (name == "xyshift") return PerturbationKind::kShiftXY;
  if (name == "xzoom") return PerturbationKind::kZoomX;
  if (name == "yzoom") return PerturbationKind::kZoomY;
  if (name == "xyzoom") return PerturbationKind::kZoomXY;
  if (name == "speckle") return PerturbationKind::kSpeckleNoise;
  if (name == "brightness") return PerturbationKind::kBrightness;
  if (name == "contrast") return PerturbationKind::kContrast;
  throw ConfigError("unknown perturbation kind '" + name + "'");
}

std::string to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::kGaussianNoise: return "gaussian";
    case PerturbationKind::kRotateLeft: return "rot_left";
    case PerturbationKind::kRotateRight: return "rot_right";
    case PerturbationKind::kShear: return "shear";
    case PerturbationKind::kShiftX: return "xshift";
    case PerturbationKind::kShiftY: return "yshift";
    case PerturbationKind::kShiftXY: return "xyshift";
    case PerturbationKind::kZoomX: return "xzoom";
    case PerturbationKind::kZoomY: return "yzoom";
    case PerturbationKind::kZoomXY: return "xyzoom";
    case PerturbationKind::kSpeckleNoise: return "speckle";
    case PerturbationKind::kBrightness: return "brightness";
    case PerturbationKind::kContrast: return "contrast";
  }
  throw ConfigError("unknown perturbation kind");
}

bool is_stochastic(PerturbationKind kind) {
  return kind == PerturbationKind::kGaussianNoise ||
         kind == PerturbationKind::kSpeckleNoise;
}

PerturbationSpec parse_perturbation_spec(const std::string& spec) {
  const auto pos = spec.find(':');
  if (pos == std::string::npos || pos == 0 || pos + 1 >= spec.size())
    throw ConfigError("perturbation spec must be 'kind:param', got '" + spec + "'");
  const PerturbationKind kind = perturbation_kind_from_string(spec.substr(0, pos));
  try {
    return {kind, std::stod(spec.substr(pos + 1))};
  } catch (const std::exception&) {
    throw ConfigError("bad perturbation parameter in '" + spec + "'");
  }
}

LevelSchedule builtin_schedule(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::kRotateLeft:
      return {kind, {0, 350, 340, 330, 320, 310, 300, 290, 280, 270}};
    case PerturbationKind::kRotateRight:
    case PerturbationKind::kShear:
      return {kind, {0, 10, 20, 30, 40, 50, 60, 70, 80, 90}};
    case PerturbationKind::kShiftX:
    case PerturbationKind::kShiftY:
    case PerturbationKind::kShiftXY:
      return {kind, {0, 2, 4, 6, 8, 10, 12, 14, 16, 18}};
    case PerturbationKind::kZoomX:
    case PerturbationKind::kZoomY:
    case PerturbationKind::kZoomXY:
      return {kind, {1.0, 0.90, 0.80, 0.70, 0.60, 0.50, 0.40, 0.30, 0.20, 0.10}};
    default:
      throw ConfigError("no builtin schedule for kind '" + to_string(kind) + "'");
  }
}

SampleGrid gaussian_perturb(const SampleGrid& x, double variance, std::uint64_t seed) {
  if (variance < 0.0) throw ConfigError("gaussian_perturb: negative variance");
  if (variance == 0.0) return x;
  SampleGrid out = x;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(variance));
  for (auto& v : out.values) v = clip01(static_cast<double>(v) + noise(rng));
  return out;
}

SampleGrid affine_transform(const SampleGrid& x, PerturbationKind kind, double param) {
  if (param == identity_param(kind)) return x;

  const bool geometric = kind != PerturbationKind::kBrightness &&
                         kind != PerturbationKind::kContrast;
  if (geometric && (x.shape.h < 2 || x.shape.w < 2))
    throw DataError("affine_transform: geometric kinds need H, W >= 2");

  switch (kind) {
    case PerturbationKind::kRotateLeft:
    case PerturbationKind::kRotateRight: {
      // Both take absolute clockwise angles; the rot-left schedule encodes
      // counter-clockwise turns as 360 - angle.
      const double th = param * M_PI / 180.0;
      const double c = std::cos(th), s = std::sin(th);
      // Inverse of a clockwise rotation.
      return warp(x, c, s, -s, c, 0.0, 0.0, false);
    }
    case PerturbationKind::kShear: {
      const double th = param * M_PI / 180.0;
      const double c = std::cos(th);
      if (std::abs(c) < 1e-9) return warp(x, 0, 0, 0, 0, 0, 0, true);
      return warp(x, 1.0, std::tan(th), 0.0, 1.0, 0.0, 0.0, false);
    }
    case PerturbationKind::kShiftX:
      return warp(x, 1, 0, 0, 1, -param, 0.0, false);
    case PerturbationKind::kShiftY:
      return warp(x, 1, 0, 0, 1, 0.0, -param, false);
    case PerturbationKind::kShiftXY:
      return warp(x, 1, 0, 0, 1, -param, -param, false);
    case PerturbationKind::kZoomX:
      if (!(param > 0.0)) throw ConfigError("zoom factor must be > 0");
      return warp(x, 1.0 / param, 0, 0, 1, 0, 0, false);
    case PerturbationKind::kZoomY:
      if (!(param > 0.0)) throw ConfigError("zoom factor must be > 0");
      return warp(x, 1, 0, 0, 1.0 / param, 0, 0, false);
    case PerturbationKind::kZoomXY:
      if (!(param > 0.0)) throw ConfigError("zoom factor must be > 0");
      return warp(x, 1.0 / param, 0, 0, 1.0 / param, 0, 0, false);
    case PerturbationKind::kBrightness: {
      SampleGrid out = x;
      for (auto& v : out.values) v = clip01(static_cast<double>(v) + param);
      return out;
    }
    case PerturbationKind::kContrast: {
      if (!(param >= 0.0)) throw ConfigError("contrast factor must be >= 0");
      SampleGrid out = x;
      for (auto& v : out.values)
        v = clip01((static_cast<double>(v) - 0.5) * param + 0.5);
      return out;
    }
    default:
      throw ConfigError("affine_transform: kind '" + to_string(kind) +
                        "' is not deterministic");
  }
}

SampleGrid perturb_sample(const SampleGrid& x, PerturbationKind kind, double param,
                          std::uint64_t seed) {
  switch (kind) {
    case PerturbationKind::kGaussianNoise:
      return gaussian_perturb(x, param, seed);
    case PerturbationKind::kSpeckleNoise: {
      if (param < 0.0) throw ConfigError("speckle: negative variance");
      if (param == 0.0) return x;
      SampleGrid out = x;
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> noise(0.0, std::sqrt(param));
      for (auto& v : out.values) {
        const double d = static_cast<double>(v);
        v = clip01(d + d * noise(rng));
      }
      return out;
    }
    default:
      return affine_transform(x, kind, param);
  }
}

LabeledDataset perturb_dataset(const LabeledDataset& d, PerturbationKind kind,
                               double param, std::uint64_t seed) {
  LabeledDataset out;
  out.num_classes = d.num_classes;
  out.samples.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    out.samples.push_back(perturb_sample(d.samples[i], kind, param, sample_seed(seed, i)));
  return out;
}

}  // namespace driftcal
