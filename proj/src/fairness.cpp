#include "fairaudit/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fairaudit/error.hpp"

namespace fairaudit {

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::calibration:
      return "calibration";
    case Criterion::predictive_parity:
      return "predictive_parity";
    case Criterion::error_rate_balance:
      return "error_rate_balance";
    case Criterion::statistical_parity:
      return "statistical_parity";
  }
  return "unknown";
}

namespace {

void check_tolerance(double tol) {
  if (!(tol >= 0.0 && tol <= 1.0)) throw std::invalid_argument("tolerance must lie in [0, 1]");
}

void check_pair(const Dataset& ds, const GroupPair& g) {
  if (g.b == g.w) throw std::invalid_argument("group pair must name two different groups");
  for (const auto* label : {&g.b, &g.w}) {
    if (!ds.has_group(*label)) throw DataError("group '" + *label + "' has no records");
  }
}

double rate_or_throw(const Rate& r, std::string_view what, const std::string& group, int s_hr) {
  if (!r) {
    throw DataError(std::string(what) + " undefined for group '" + group + "' at cutoff " + std::to_string(s_hr));
  }
  return *r;
}

CriterionResult finish(CriterionResult r) {
  r.satisfied = r.max_abs_gap <= r.tolerance;
  return r;
}

}  // namespace

CriterionResult check_calibration(const Dataset& ds, const GroupPair& groups, double tolerance) {
  check_tolerance(tolerance);
  check_pair(ds, groups);
  const auto curve = calibration_curve(ds);
  CriterionResult r;
  r.criterion = Criterion::calibration;
  r.tolerance = tolerance;
  std::vector<std::pair<std::string, double>> vb, vw;
  for (int s = ds.schema().score_min; s <= ds.schema().score_max; ++s) {
    auto cell = [&](const std::string& g) {
      return std::find_if(curve.begin(), curve.end(), [&](const CalibrationCell& c) {
        return c.group == g && c.score == s;
      });
    };
    const auto cb = cell(groups.b);
    const auto cw = cell(groups.w);
    if (!cb->estimate || !cw->estimate) {
      r.skipped_scores.push_back(s);
      continue;
    }
    const std::string key = "s=" + std::to_string(s);
    vb.emplace_back(key, *cb->estimate);
    vw.emplace_back(key, *cw->estimate);
    r.max_abs_gap = std::max(r.max_abs_gap, std::abs(*cb->estimate - *cw->estimate));
  }
  if (vb.empty()) throw DataError("calibration: no score has records in both groups");
  r.values = {{groups.b, std::move(vb)}, {groups.w, std::move(vw)}};
  return finish(std::move(r));
}

CriterionResult check_predictive_parity(const Dataset& ds, const GroupPair& groups, int s_hr, double tolerance) {
  check_tolerance(tolerance);
  check_pair(ds, groups);
  const auto mb = group_metrics(ds, groups.b, s_hr);
  const auto mw = group_metrics(ds, groups.w, s_hr);
  const double pb = rate_or_throw(mb.ppv, "PPV", groups.b, s_hr);
  const double pw = rate_or_throw(mw.ppv, "PPV", groups.w, s_hr);
  CriterionResult r;
  r.criterion = Criterion::predictive_parity;
  r.threshold = s_hr;
  r.tolerance = tolerance;
  r.values = {{groups.b, {{"ppv", pb}}}, {groups.w, {{"ppv", pw}}}};
  r.max_abs_gap = std::abs(pb - pw);
  return finish(std::move(r));
}

CriterionResult check_error_rate_balance(const Dataset& ds, const GroupPair& groups, int s_hr, double tolerance) {
  check_tolerance(tolerance);
  check_pair(ds, groups);
  const auto mb = group_metrics(ds, groups.b, s_hr);
  const auto mw = group_metrics(ds, groups.w, s_hr);
  const double fpr_b = rate_or_throw(mb.fpr, "FPR", groups.b, s_hr);
  const double fpr_w = rate_or_throw(mw.fpr, "FPR", groups.w, s_hr);
  const double fnr_b = rate_or_throw(mb.fnr, "FNR", groups.b, s_hr);
  const double fnr_w = rate_or_throw(mw.fnr, "FNR", groups.w, s_hr);
  CriterionResult r;
  r.criterion = Criterion::error_rate_balance;
  r.threshold = s_hr;
  r.tolerance = tolerance;
  r.values = {{groups.b, {{"fpr", fpr_b}, {"fnr", fnr_b}}}, {groups.w, {{"fpr", fpr_w}, {"fnr", fnr_w}}}};
  r.max_abs_gap = std::max(std::abs(fpr_b - fpr_w), std::abs(fnr_b - fnr_w));
  return finish(std::move(r));
}

CriterionResult check_statistical_parity(const Dataset& ds, const GroupPair& groups, int s_hr, double tolerance) {
  check_tolerance(tolerance);
  check_pair(ds, groups);
  const auto mb = group_metrics(ds, groups.b, s_hr);
  const auto mw = group_metrics(ds, groups.w, s_hr);
  CriterionResult r;
  r.criterion = Criterion::statistical_parity;
  r.threshold = s_hr;
  r.tolerance = tolerance;
  r.values = {{groups.b, {{"high_risk_rate", mb.high_risk_rate}}}, {groups.w, {{"high_risk_rate", mw.high_risk_rate}}}};
  r.max_abs_gap = std::abs(mb.high_risk_rate - mw.high_risk_rate);
  return finish(std::move(r));
}

CriterionResult check_calibration(const Dataset& ds, double tolerance) {
  return check_calibration(ds, default_pair(ds), tolerance);
}
CriterionResult check_predictive_parity(const Dataset& ds, int s_hr, double tolerance) {
  return check_predictive_parity(ds, default_pair(ds), s_hr, tolerance);
}
CriterionResult check_error_rate_balance(const Dataset& ds, int s_hr, double tolerance) {
  return check_error_rate_balance(ds, default_pair(ds), s_hr, tolerance);
}
CriterionResult check_statistical_parity(const Dataset& ds, int s_hr, double tolerance) {
  return check_statistical_parity(ds, default_pair(ds), s_hr, tolerance);
}

double implied_fpr(double p, double ppv, double fnr) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("implied_fpr: prevalence must lie in (0, 1)");
  if (!(ppv > 0.0 && ppv <= 1.0)) throw std::domain_error("implied_fpr: PPV must lie in (0, 1]");
  if (!(fnr >= 0.0 && fnr <= 1.0)) throw std::domain_error("implied_fpr: FNR must lie in [0, 1]");
  return p / (1.0 - p) * ((1.0 - ppv) / ppv) * (1.0 - fnr);
}

ImpossibilityFinding impossibility_report(const GroupMetrics& b, const GroupMetrics& w, double tolerance) {
  check_tolerance(tolerance);
  if (b.threshold != w.threshold) throw std::invalid_argument("impossibility_report: cutoffs differ");
  for (const auto* m : {&b, &w}) {
    if (!m->ppv || !m->fpr || !m->fnr) {
      throw DataError("impossibility_report: rates undefined for group '" + m->group + "'");
    }
  }
  ImpossibilityFinding f;
  f.group_b = b.group;
  f.group_w = w.group;
  f.threshold = b.threshold;
  f.tolerance = tolerance;
  f.prevalence_gap = std::abs(b.prevalence - w.prevalence);
  f.ppv_gap = std::abs(*b.ppv - *w.ppv);
  f.fpr_gap = std::abs(*b.fpr - *w.fpr);
  f.fnr_gap = std::abs(*b.fnr - *w.fnr);
  f.flagged = f.prevalence_gap > tolerance && f.ppv_gap <= tolerance;

  f.balanced_fnr = *w.fnr;
  const bool prevalence_interior = b.prevalence > 0.0 && b.prevalence < 1.0 && w.prevalence > 0.0 && w.prevalence < 1.0;
  if (prevalence_interior && *w.ppv > 0.0) {
    f.implied_fpr_b = implied_fpr(b.prevalence, *w.ppv, f.balanced_fnr);
    f.implied_fpr_w = implied_fpr(w.prevalence, *w.ppv, f.balanced_fnr);
  }
  f.error_rate_balance_impossible = f.flagged && f.balanced_fnr < 1.0 && f.implied_fpr_b != f.implied_fpr_w;
  return f;
}

}  // namespace fairaudit
