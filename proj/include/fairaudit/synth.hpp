#pragma once

// Synthetic two-group populations with controlled prevalence and per-outcome
// score distributions, plus constructions of instruments that satisfy
// predictive parity or calibration exactly.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/config.hpp"
#include "fairaudit/dataset.hpp"
#include "fairaudit/metrics.hpp"

namespace fairaudit {

struct GroupSpec {
  std::string label;
  std::int64_t size = 1;
  double prevalence = 0.5;
  std::vector<double> pmf_negative;  // f_{r,0} over the score support
  std::vector<double> pmf_positive;  // f_{r,1}
};

enum class GenerationMode {
  // Counts fixed by largest-remainder rounding; no randomness.
  exact,
  // Outcomes and scores drawn from seeded per-cell random streams.
  sampled,
};

// Config keys:
//   score_min, score_max, seed, mode = exact|sampled, groups = b, w
//   group.<label>.size, group.<label>.prevalence,
//   group.<label>.pmf0 = comma list, group.<label>.pmf1 = comma list
struct PopulationSpec {
  int score_min = 1;
  int score_max = 10;
  std::vector<GroupSpec> groups;
  std::uint64_t seed = 0;
  GenerationMode mode = GenerationMode::exact;
  // Exact mode only: fail instead of rounding when a count is not integral.
  bool require_integral = false;

  void validate() const;
  static PopulationSpec from_config(const KeyValueConfig& cfg);
  static PopulationSpec load(const std::filesystem::path& path);
  KeyValueConfig to_config() const;
};

// Apportions `total` units to `weights` (summing to 1) by the
// largest-remainder method; ties go to the lower index.
std::vector<std::int64_t> largest_remainder(std::int64_t total, std::span<const double> weights);

Dataset generate(const PopulationSpec& spec);

struct ParityOptions {
  double fnr_b = 0.3;
  double fnr_w = 0.3;
  std::int64_t size_b = 10000;
  std::int64_t size_w = 10000;
  // Target PPV is rounded to a fraction with this denominator so that both
  // groups can realize it exactly.
  int ppv_denominator = 1000;
  std::string label_b = "b";
  std::string label_w = "w";
  std::uint64_t seed = 0;
};

struct ParityInstrument {
  PopulationSpec spec;
  int s_hr = 0;
  double ppv = 0.0;  // realized, identical in both groups
  double prevalence_b = 0.0;
  double prevalence_w = 0.0;
  double fnr_b = 0.0;  // realized
  double fnr_w = 0.0;
  ConfusionMatrix matrix_b;
  ConfusionMatrix matrix_w;
};

// Population whose exact-count realization has PPV_b = PPV_w at s_hr.
// Throws std::domain_error when target_ppv is infeasible for a prevalence
// at the requested FNR (the identity would need FPR > 1).
ParityInstrument construct_parity_instrument(double p_b, double p_w, int s_hr, double target_ppv, int score_min,
                                             int score_max, const ParityOptions& options = {});

struct CalibratedGroup {
  std::string label;
  std::vector<double> score_pmf;
  std::int64_t size = 1;
};

// Population in which every group shares P(Y = 1 | S = s) = rates[s].
PopulationSpec construct_calibrated_instrument(std::span<const double> rates, const std::vector<CalibratedGroup>& groups,
                                               int score_min, int score_max, std::uint64_t seed = 0);

}  // namespace fairaudit
