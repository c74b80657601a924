#include "fairaudit/tradeoff.hpp"

#include <algorithm>
#include <stdexcept>

#include "fairaudit/error.hpp"
#include "fairaudit/fairness.hpp"

namespace fairaudit {

double FeasibleLine::min_feasible_fnr() const { return intercept > 1.0 ? 1.0 - 1.0 / intercept : 0.0; }

FeasibleLine feasible_line(double p, double ppv) {
  FeasibleLine line;
  line.prevalence = p;
  line.ppv = ppv;
  line.intercept = implied_fpr(p, ppv, 0.0);
  line.slope = -line.intercept;
  return line;
}

double FeasibleRegion::lower_fpr(double fnr) const { return std::clamp(lower.fpr(fnr), 0.0, 1.0); }

double FeasibleRegion::upper_fpr(double fnr) const { return upper ? std::clamp(upper->fpr(fnr), 0.0, 1.0) : 1.0; }

bool FeasibleRegion::contains(double fnr, double fpr, double eps) const {
  if (fnr < 0.0 || fnr > 1.0 || fpr < 0.0 || fpr > 1.0) return false;
  return fpr >= lower_fpr(fnr) - eps && fpr <= upper_fpr(fnr) + eps;
}

FeasibleRegion feasible_region(double p, double ppv_center, double delta) {
  if (!(delta >= 0.0)) throw std::domain_error("feasible_region: delta must be non-negative");
  if (!(ppv_center > 0.0 && ppv_center <= 1.0)) throw std::domain_error("feasible_region: PPV must lie in (0, 1]");
  FeasibleRegion r;
  r.prevalence = p;
  r.ppv_center = ppv_center;
  r.delta = delta;
  r.ppv_high = std::min(ppv_center + delta, 1.0);
  r.ppv_low = ppv_center - delta;
  r.clipped = ppv_center + delta > 1.0;
  r.lower = feasible_line(p, r.ppv_high);
  if (r.ppv_low > 0.0) {
    r.upper = feasible_line(p, r.ppv_low);
    r.clipped = r.clipped || r.upper->clipped();
  } else {
    r.ppv_low = 0.0;
    r.clipped = true;
  }
  r.clipped = r.clipped || r.lower.clipped();
  return r;
}

StrategyReport strategy_report(const GroupMetrics& b, const GroupMetrics& w) {
  if (b.threshold != w.threshold) throw std::invalid_argument("strategy_report: cutoffs differ");
  for (const auto* m : {&b, &w}) {
    if (!m->ppv || !m->fpr || !m->fnr) throw DataError("strategy_report: rates undefined for group '" + m->group + "'");
  }
  if (!(b.prevalence > 0.0 && b.prevalence < 1.0)) {
    throw DataError("strategy_report: prevalence of group '" + b.group + "' must lie in (0, 1)");
  }
  const double p_b = b.prevalence;
  const double ppv_w = *w.ppv, fpr_w = *w.fpr, fnr_w = *w.fnr;

  StrategyReport rep;
  rep.group_b = b.group;
  rep.group_w = w.group;
  rep.threshold = b.threshold;
  rep.equalize_fpr.current = *b.fnr;
  rep.equalize_fnr.current = *b.fpr;
  rep.equalize_both.current = *b.ppv;

  if (ppv_w <= 0.0) {
    rep.equalize_fpr.note = rep.equalize_fnr.note = "PPV_w is 0; the identity is undefined";
  } else {
    // (i): solve k * (1 - FNR_b) = FPR_w.
    const double k = implied_fpr(p_b, ppv_w, 0.0);
    if (k == 0.0) {
      if (fpr_w == 0.0) {
        rep.equalize_fpr.value = *b.fnr;
        rep.equalize_fpr.note = "PPV_w = 1 forces FPR_b = 0 at every FNR_b";
      } else {
        rep.equalize_fpr.note = "PPV_w = 1 forces FPR_b = 0, which cannot match FPR_w > 0";
      }
    } else {
      const double fnr = 1.0 - fpr_w / k;
      if (fnr >= 0.0 && fnr <= 1.0) {
        rep.equalize_fpr.value = fnr;
      } else {
        rep.equalize_fpr.note = "required FNR_b lies outside [0, 1]";
      }
    }
    // (ii)
    const double fpr = implied_fpr(p_b, ppv_w, fnr_w);
    if (fpr <= 1.0) {
      rep.equalize_fnr.value = fpr;
    } else {
      rep.equalize_fnr.note = "required FPR_b exceeds 1";
    }
  }

  // (iii): FPR_w = a * (1 - PPV) / PPV with a = p_b / (1 - p_b) * (1 - FNR_w),
  // so PPV = a / (a + FPR_w).
  const double a = p_b / (1.0 - p_b) * (1.0 - fnr_w);
  if (a + fpr_w == 0.0) {
    rep.equalize_both.note = "FNR_w = 1 and FPR_w = 0: nobody is high-risk, PPV undefined";
  } else if (a == 0.0) {
    rep.equalize_both.note = "FNR_w = 1 with FPR_w > 0 would need PPV_b = 0";
  } else {
    rep.equalize_both.value = a / (a + fpr_w);
  }
  return rep;
}

}  // namespace fairaudit
