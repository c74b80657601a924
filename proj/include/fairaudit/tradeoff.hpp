#pragma once

// Feasible (FNR, FPR) combinations when prevalence and PPV are held fixed.
// For fixed p and PPV the identity makes FPR affine in FNR:
//
//   FPR(FNR) = k * (1 - FNR),   k = p / (1 - p) * (1 - PPV) / PPV

#include <optional>
#include <string>

#include "fairaudit/metrics.hpp"

namespace fairaudit {

struct FeasibleLine {
  double prevalence = 0.5;
  double ppv = 0.5;
  double intercept = 1.0;  // FPR at FNR = 0, i.e. k above
  double slope = -1.0;     // -k

  double fpr(double fnr) const { return intercept * (1.0 - fnr); }
  // Smallest FNR at which FPR <= 1. 0 when the whole line is inside the
  // unit square; otherwise FNR in [0, min_feasible_fnr) is infeasible.
  double min_feasible_fnr() const;
  bool clipped() const { return intercept > 1.0; }
};

FeasibleLine feasible_line(double p, double ppv);

// Band of lines for PPV in [ppv_center - delta, ppv_center + delta]
// intersected with (0, 1]. Higher PPV gives the lower boundary.
struct FeasibleRegion {
  double prevalence = 0.5;
  double ppv_center = 0.5;
  double delta = 0.0;
  double ppv_low = 0.5;   // PPV of the upper boundary line
  double ppv_high = 0.5;  // PPV of the lower boundary line
  FeasibleLine lower;
  // Absent when the band reaches PPV = 0: the region then extends to FPR = 1.
  std::optional<FeasibleLine> upper;
  // Band touched PPV = 0 or 1, or a boundary leaves the unit square.
  bool clipped = false;

  double lower_fpr(double fnr) const;  // clipped to [0, 1]
  double upper_fpr(double fnr) const;  // clipped to [0, 1]
  // Inclusive membership with an absolute slack for round-off.
  bool contains(double fnr, double fpr, double eps = 1e-12) const;
};

FeasibleRegion feasible_region(double p, double ppv_center, double delta);

// Retuning strategies for group b with group w as the target:
//  (i)   keep PPV_b = PPV_w and match FPR_w by moving FNR_b,
//  (ii)  keep PPV_b = PPV_w and match FNR_w, accepting the forced FPR_b,
//  (iii) match both error rates, accepting the forced PPV_b.
struct StrategyOutcome {
  std::optional<double> value;  // required FNR_b, FPR_b or PPV_b
  double current = 0.0;         // group b's observed value of that quantity
  std::string note;             // why there is no solution, if none
};

struct StrategyReport {
  std::string group_b;
  std::string group_w;
  int threshold = 0;
  StrategyOutcome equalize_fpr;   // (i): FNR_b
  StrategyOutcome equalize_fnr;   // (ii): FPR_b
  StrategyOutcome equalize_both;  // (iii): PPV_b
};

StrategyReport strategy_report(const GroupMetrics& b, const GroupMetrics& w);

}  // namespace fairaudit
