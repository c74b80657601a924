#pragma once

// Two-group fairness criteria and the prevalence / PPV / error-rate identity
//
//   FPR = p / (1 - p) * (1 - PPV) / PPV * (1 - FNR)
//
// which makes predictive parity and error rate balance incompatible when
// prevalences differ.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairaudit/dataset.hpp"
#include "fairaudit/metrics.hpp"

namespace fairaudit {

enum class Criterion { calibration, predictive_parity, error_rate_balance, statistical_parity };

std::string_view to_string(Criterion c);

inline constexpr double kDefaultTolerance = 0.02;

struct CriterionResult {
  Criterion criterion = Criterion::calibration;
  std::optional<int> threshold;  // calibration is threshold-free
  // Per-group compared quantities, e.g. {"ppv", 0.59} or {"s=3", 0.41}.
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>> values;
  double max_abs_gap = 0.0;
  double tolerance = kDefaultTolerance;
  bool satisfied = true;
  // Calibration only: scores skipped because a group's cell is empty.
  std::vector<int> skipped_scores;
};

CriterionResult check_calibration(const Dataset& ds, const GroupPair& groups, double tolerance = kDefaultTolerance);
CriterionResult check_predictive_parity(const Dataset& ds, const GroupPair& groups, int s_hr,
                                        double tolerance = kDefaultTolerance);
CriterionResult check_error_rate_balance(const Dataset& ds, const GroupPair& groups, int s_hr,
                                         double tolerance = kDefaultTolerance);
CriterionResult check_statistical_parity(const Dataset& ds, const GroupPair& groups, int s_hr,
                                         double tolerance = kDefaultTolerance);

// Overloads comparing the first two groups of the dataset.
CriterionResult check_calibration(const Dataset& ds, double tolerance = kDefaultTolerance);
CriterionResult check_predictive_parity(const Dataset& ds, int s_hr, double tolerance = kDefaultTolerance);
CriterionResult check_error_rate_balance(const Dataset& ds, int s_hr, double tolerance = kDefaultTolerance);
CriterionResult check_statistical_parity(const Dataset& ds, int s_hr, double tolerance = kDefaultTolerance);

// FPR forced by prevalence p, PPV and FNR. Values above 1 mean the
// combination is infeasible; they are returned as is.
// Requires 0 < p < 1, 0 < ppv <= 1, 0 <= fnr <= 1.
double implied_fpr(double p, double ppv, double fnr);

struct ImpossibilityFinding {
  std::string group_b;
  std::string group_w;
  int threshold = 0;
  double tolerance = kDefaultTolerance;
  double prevalence_gap = 0.0;  // |p_b - p_w|
  double ppv_gap = 0.0;         // |PPV_b - PPV_w|
  double fpr_gap = 0.0;
  double fnr_gap = 0.0;
  // Prevalences differ beyond tolerance while PPVs agree within it.
  bool flagged = false;
  // Under exact parity at PPV_w with both FNRs held at FNR_w, the FPR the
  // identity forces on each group. They differ whenever p_b != p_w,
  // FNR_w < 1 and PPV_w < 1.
  double balanced_fnr = 0.0;
  double implied_fpr_b = 0.0;
  double implied_fpr_w = 0.0;
  // flagged, and the forced FPRs above differ.
  bool error_rate_balance_impossible = false;
};

ImpossibilityFinding impossibility_report(const GroupMetrics& b, const GroupMetrics& w,
                                          double tolerance = kDefaultTolerance);

}  // namespace fairaudit
