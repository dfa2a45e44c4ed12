#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "driftcal/data.hpp"

namespace driftcal {

enum class PerturbationKind {
  kGaussianNoise,
  kRotateLeft,
  kRotateRight,
  kShear,
  kShiftX,
  kShiftY,
  kShiftXY,
  kZoomX,
  kZoomY,
  kZoomXY,
  kSpeckleNoise,
  kBrightness,
  kContrast,
};

PerturbationKind perturbation_kind_from_string(const std::string& name);
std::string to_string(PerturbationKind kind);
bool is_stochastic(PerturbationKind kind);

// Parses "kind:param" specs, e.g. "gaussian:0.04" or "rot_right:30".
struct PerturbationSpec {
  PerturbationKind kind;
  double param;
};
PerturbationSpec parse_perturbation_spec(const std::string& spec);

struct LevelSchedule {
  PerturbationKind kind;
  std::vector<double> params;  // exactly 10 levels, level 0 = identity
};

// Table of 10-level parameter lists for the affine family.
LevelSchedule builtin_schedule(PerturbationKind kind);

// Additive Gaussian noise with the given variance, clipped to [0,1].
SampleGrid gaussian_perturb(const SampleGrid& x, double variance, std::uint64_t seed);

// Geometric/photometric transforms; nearest-neighbor, zero fill, clipped.
SampleGrid affine_transform(const SampleGrid& x, PerturbationKind kind, double param);

SampleGrid perturb_sample(const SampleGrid& x, PerturbationKind kind, double param,
                          std::uint64_t seed);

// Sample-wise perturbation; stochastic kinds derive per-sample streams from
// (seed, sample index).
LabeledDataset perturb_dataset(const LabeledDataset& d, PerturbationKind kind,
                               double param, std::uint64_t seed);

}  // namespace driftcal
