#include "fairaudit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "fairaudit/error.hpp"

namespace fairaudit {

namespace {

Rate ratio(std::int64_t num, std::int64_t den) {
  if (den <= 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
}

std::optional<Interval> maybe_interval(std::int64_t k, std::int64_t n, double level) {
  if (n <= 0) return std::nullopt;
  return wilson_interval(k, n, level);
}

void check_cutoff(const Schema& s, int s_hr) {
  if (s_hr < s.score_min - 1 || s_hr > s.score_max) {
    throw std::invalid_argument("cutoff " + std::to_string(s_hr) + " outside [" + std::to_string(s.score_min - 1) +
                                ", " + std::to_string(s.score_max) + "]");
  }
}

}  // namespace

Rate ConfusionMatrix::prevalence() const { return ratio(positives(), total()); }
Rate ConfusionMatrix::ppv() const { return ratio(tp, high_risk()); }
Rate ConfusionMatrix::fpr() const { return ratio(fp, negatives()); }
Rate ConfusionMatrix::fnr() const { return ratio(fn, positives()); }
Rate ConfusionMatrix::high_risk_rate() const { return ratio(high_risk(), total()); }

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double level) {
  check_level(level);
  if (trials <= 0 || successes < 0 || successes > trials) {
    throw std::invalid_argument("wilson_interval: need 0 <= successes <= trials, trials > 0");
  }
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  // Rounding can push an endpoint past the estimate at p = 0 or 1.
  return {std::clamp(std::min(center - half, p), 0.0, 1.0), std::clamp(std::max(center + half, p), 0.0, 1.0), level};
}

ConfusionMatrix confusion(std::span<const Record> records, int s_hr) {
  ConfusionMatrix m;
  for (const Record& r : records) {
    const bool high = r.score > s_hr;
    if (r.outcome == 1) {
      (high ? m.tp : m.fn) += 1;
    } else {
      (high ? m.fp : m.tn) += 1;
    }
  }
  return m;
}

ConfusionMatrix confusion(const Dataset& ds, std::string_view group, int s_hr) {
  const auto& declared = ds.schema().groups;
  if (std::find(declared.begin(), declared.end(), group) == declared.end()) {
    throw DataError("unknown group '" + std::string(group) + "'");
  }
  check_cutoff(ds.schema(), s_hr);
  ConfusionMatrix m;
  for (const Record& r : ds.records()) {
    if (r.group != group) continue;
    const bool high = r.score > s_hr;
    if (r.outcome == 1) {
      (high ? m.tp : m.fn) += 1;
    } else {
      (high ? m.fp : m.tn) += 1;
    }
  }
  if (m.total() == 0) throw DataError("group '" + std::string(group) + "' has no records");
  return m;
}

GroupMetrics metrics_from_matrix(std::string group, int s_hr, const ConfusionMatrix& m, double ci_level) {
  check_level(ci_level);
  if (m.tn < 0 || m.fp < 0 || m.fn < 0 || m.tp < 0) throw std::invalid_argument("negative confusion count");
  if (m.total() == 0) throw DataError("group '" + group + "' has no records");
  GroupMetrics g;
  g.group = std::move(group);
  g.threshold = s_hr;
  g.matrix = m;
  g.prevalence = *m.prevalence();
  g.ppv = m.ppv();
  g.fpr = m.fpr();
  g.fnr = m.fnr();
  g.high_risk_rate = *m.high_risk_rate();
  g.intervals.prevalence = wilson_interval(m.positives(), m.total(), ci_level);
  g.intervals.ppv = maybe_interval(m.tp, m.high_risk(), ci_level);
  g.intervals.fpr = maybe_interval(m.fp, m.negatives(), ci_level);
  g.intervals.fnr = maybe_interval(m.fn, m.positives(), ci_level);
  g.intervals.high_risk_rate = wilson_interval(m.high_risk(), m.total(), ci_level);
  return g;
}

GroupMetrics group_metrics(const Dataset& ds, std::string_view group, int s_hr, double ci_level) {
  return metrics_from_matrix(std::string(group), s_hr, confusion(ds, group, s_hr), ci_level);
}

std::vector<GroupSweep> threshold_sweep(const Dataset& ds, double ci_level) {
  check_level(ci_level);
  const Schema& s = ds.schema();
  const auto groups = ds.groups();
  if (groups.empty()) throw DataError("threshold sweep: dataset has no records");

  // Per-group (score, outcome) histogram, then cumulative counts per cutoff.
  const int width = s.score_max - s.score_min + 1;
  std::vector<GroupSweep> out;
  for (const auto& g : groups) {
    std::vector<std::int64_t> pos(width, 0), neg(width, 0);
    for (const Record& r : ds.records()) {
      if (r.group != g) continue;
      (r.outcome == 1 ? pos : neg)[r.score - s.score_min] += 1;
    }
    GroupSweep sweep{g, {}};
    for (int cut = s.score_min - 1; cut <= s.score_max - 1; ++cut) {
      ConfusionMatrix m;
      for (int i = 0; i < width; ++i) {
        const bool high = s.score_min + i > cut;
        (high ? m.tp : m.fn) += pos[i];
        (high ? m.fp : m.tn) += neg[i];
      }
      sweep.cutoffs.push_back(metrics_from_matrix(g, cut, m, ci_level));
    }
    out.push_back(std::move(sweep));
  }
  return out;
}

std::vector<CalibrationCell> calibration_curve(const Dataset& ds, double ci_level) {
  check_level(ci_level);
  const Schema& s = ds.schema();
  const int width = s.score_max - s.score_min + 1;
  std::vector<CalibrationCell> out;
  for (const auto& g : ds.groups()) {
    std::vector<std::int64_t> n(width, 0), k(width, 0);
    for (const Record& r : ds.records()) {
      if (r.group != g) continue;
      n[r.score - s.score_min] += 1;
      k[r.score - s.score_min] += r.outcome;
    }
    for (int i = 0; i < width; ++i) {
      CalibrationCell c;
      c.group = g;
      c.score = s.score_min + i;
      c.n = n[i];
      c.positives = k[i];
      c.estimate = ratio(k[i], n[i]);
      c.interval = maybe_interval(k[i], n[i], ci_level);
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace fairaudit
