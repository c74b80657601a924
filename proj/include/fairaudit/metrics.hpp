#pragma once

// Per-group confusion matrices at a high-risk cutoff and the rates derived
// from them. A record is high-risk iff score > cutoff.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/dataset.hpp"

namespace fairaudit {

// A proportion that may be undefined because its denominator is zero.
using Rate = std::optional<double>;

struct ConfusionMatrix {
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tp = 0;

  std::int64_t total() const { return tn + fp + fn + tp; }
  std::int64_t positives() const { return tp + fn; }
  std::int64_t negatives() const { return tn + fp; }
  std::int64_t high_risk() const { return tp + fp; }

  Rate prevalence() const;
  Rate ppv() const;
  Rate fpr() const;
  Rate fnr() const;
  Rate high_risk_rate() const;

  bool operator==(const ConfusionMatrix&) const = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double level = 0.95;
};

// Wilson score interval for `successes` out of `trials` (trials > 0).
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double level);

struct GroupMetrics {
  std::string group;
  int threshold = 0;
  ConfusionMatrix matrix;
  double prevalence = 0.0;
  Rate ppv;
  Rate fpr;
  Rate fnr;
  double high_risk_rate = 0.0;

  struct Intervals {
    Interval prevalence;
    std::optional<Interval> ppv;
    std::optional<Interval> fpr;
    std::optional<Interval> fnr;
    Interval high_risk_rate;
  } intervals;
};

ConfusionMatrix confusion(std::span<const Record> records, int s_hr);
ConfusionMatrix confusion(const Dataset& ds, std::string_view group, int s_hr);

GroupMetrics metrics_from_matrix(std::string group, int s_hr, const ConfusionMatrix& m, double ci_level);
GroupMetrics group_metrics(const Dataset& ds, std::string_view group, int s_hr, double ci_level = 0.95);

struct GroupSweep {
  std::string group;
  std::vector<GroupMetrics> cutoffs;  // s_hr = score_min-1 .. score_max-1
};

std::vector<GroupSweep> threshold_sweep(const Dataset& ds, double ci_level = 0.95);

struct CalibrationCell {
  std::string group;
  int score = 0;
  std::int64_t n = 0;
  std::int64_t positives = 0;
  Rate estimate;  // absent when n == 0
  std::optional<Interval> interval;
};

// One cell per (group, score) over the full declared support, groups in
// declared order.
std::vector<CalibrationCell> calibration_curve(const Dataset& ds, double ci_level = 0.95);

}  // namespace fairaudit
