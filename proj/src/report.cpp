#include "fairaudit/report.hpp"

#include <ostream>
#include <stdexcept>

#include "fairaudit/csv.hpp"
#include "fairaudit/error.hpp"
#include "fairaudit/format.hpp"

namespace fairaudit {

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

template <class T>
Json opt_json(const std::optional<T>& v) {
  return v ? to_json(*v) : Json(nullptr);
}

std::string cell(double v) { return format_number(v); }
std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }
std::string cell(std::int64_t v) { return std::to_string(v); }

std::string outcome_label(int y) { return y == 0 ? "0" : "1"; }

Json pair_json(const GroupPair& g) { return {{"b", g.b}, {"w", g.w}}; }

}  // namespace

std::string tool_version() { return FAIRAUDIT_VERSION; }

void write_table(std::ostream& out, const TableExport& table) {
  csv::write_row(out, table.header);
  for (const auto& row : table.rows) csv::write_row(out, row);
}

void write_json(std::ostream& out, const Json& doc) { out << doc.dump(2) << '\n'; }

Json to_json(const Provenance& p) {
  return {{"source", p.source}, {"steps", p.steps}, {"diagnostics", p.diagnostics}};
}

Json to_json(const ConfusionMatrix& m) { return {{"tn", m.tn}, {"fp", m.fp}, {"fn", m.fn}, {"tp", m.tp}}; }

Json to_json(const Interval& i) { return {{"lo", i.lo}, {"hi", i.hi}, {"level", i.level}}; }

Json to_json(const GroupMetrics& g) {
  return {
      {"group", g.group},
      {"threshold", g.threshold},
      {"matrix", to_json(g.matrix)},
      {"n", g.matrix.total()},
      {"prevalence", g.prevalence},
      {"ppv", opt(g.ppv)},
      {"fpr", opt(g.fpr)},
      {"fnr", opt(g.fnr)},
      {"high_risk_rate", g.high_risk_rate},
      {"intervals",
       {{"prevalence", to_json(g.intervals.prevalence)},
        {"ppv", opt_json(g.intervals.ppv)},
        {"fpr", opt_json(g.intervals.fpr)},
        {"fnr", opt_json(g.intervals.fnr)},
        {"high_risk_rate", to_json(g.intervals.high_risk_rate)}}},
  };
}

Json to_json(const CalibrationCell& c) {
  return {{"group", c.group},         {"score", c.score},         {"n", c.n},
          {"positives", c.positives}, {"estimate", opt(c.estimate)}, {"interval", opt_json(c.interval)}};
}

Json to_json(const CriterionResult& r) {
  Json values = Json::object();
  for (const auto& [group, named] : r.values) {
    Json g = Json::object();
    for (const auto& [name, v] : named) g[name] = v;
    values[group] = std::move(g);
  }
  return {{"criterion", std::string(to_string(r.criterion))},
          {"threshold", r.threshold ? Json(*r.threshold) : Json(nullptr)},
          {"values", std::move(values)},
          {"max_abs_gap", r.max_abs_gap},
          {"tolerance", r.tolerance},
          {"satisfied", r.satisfied},
          {"skipped_scores", r.skipped_scores}};
}

Json to_json(const ImpossibilityFinding& f) {
  return {{"groups", {{"b", f.group_b}, {"w", f.group_w}}},
          {"threshold", f.threshold},
          {"tolerance", f.tolerance},
          {"prevalence_gap", f.prevalence_gap},
          {"ppv_gap", f.ppv_gap},
          {"fpr_gap", f.fpr_gap},
          {"fnr_gap", f.fnr_gap},
          {"flagged", f.flagged},
          {"balanced_fnr", f.balanced_fnr},
          {"implied_fpr_b", f.implied_fpr_b},
          {"implied_fpr_w", f.implied_fpr_w},
          {"error_rate_balance_impossible", f.error_rate_balance_impossible}};
}

Json to_json(const PenaltyPolicy& p) {
  Json j = {{"kind", std::string(to_string(p.kind))},
            {"t_min", p.t_min},
            {"t_max", p.t_max},
            {"score_min", p.score_min},
            {"score_max", p.score_max}};
  j["s_hr"] = p.kind == PolicyKind::minmax ? Json(p.s_hr) : Json(nullptr);
  return j;
}

Json to_json(const ImpactReport& r) {
  return {{"policy", std::string(to_string(r.kind))},
          {"groups", {{"b", r.group_b}, {"w", r.group_w}}},
          {"y1", r.y1},
          {"y2", r.y2},
          {"n_b", r.n_b},
          {"n_w", r.n_w},
          {"mean_b", r.mean_b},
          {"mean_w", r.mean_w},
          {"delta_empirical", r.delta_empirical},
          {"delta_closed_form", opt(r.delta_closed_form)},
          {"high_risk_b", opt(r.high_risk_b)},
          {"high_risk_w", opt(r.high_risk_w)},
          {"tv", r.tv},
          {"tv_bound", r.tv_bound}};
}

namespace {

Json to_json(const StratumSummary& s) {
  return {{"n", s.n}, {"mean", opt(s.mean)}, {"sd", opt(s.sd)}, {"high_risk_rate", opt(s.high_risk_rate)}};
}

Json to_json(const WelchTest& w) { return {{"t", w.t}, {"df", w.df}, {"p_value", w.p_value}}; }

}  // namespace

Json to_json(const SentencingAnalysis& a) {
  Json rows = Json::array();
  for (const auto& r : a.rows) {
    rows.push_back({{"ogs", r.ogs},
                    {"outcome", r.outcome},
                    {"range", {{"t_min", r.range.t_min}, {"t_max", r.range.t_max}}},
                    {"b", to_json(r.b)},
                    {"w", to_json(r.w)},
                    {"delta", opt(r.delta)},
                    {"delta_closed_form", opt(r.delta_closed_form)},
                    {"welch", r.welch ? to_json(*r.welch) : Json(nullptr)},
                    {"significant", r.significant}});
  }
  return {{"policy", std::string(to_string(a.kind))},
          {"s_hr", a.s_hr},
          {"alpha", a.alpha},
          {"test", "Welch two-sample t, two-sided"},
          {"groups", pair_json(a.groups)},
          {"prior_record_score", a.prior_record_score},
          {"excluded_missing", a.excluded_missing},
          {"rows", std::move(rows)}};
}

Json to_json(const FeasibleLine& l) {
  return {{"prevalence", l.prevalence},
          {"ppv", l.ppv},
          {"intercept", l.intercept},
          {"slope", l.slope},
          {"min_feasible_fnr", l.min_feasible_fnr()},
          {"clipped", l.clipped()}};
}

Json to_json(const FeasibleRegion& r) {
  return {{"prevalence", r.prevalence}, {"ppv_center", r.ppv_center}, {"delta", r.delta},
          {"ppv_low", r.ppv_low},       {"ppv_high", r.ppv_high},     {"lower", to_json(r.lower)},
          {"upper", opt_json(r.upper)}, {"clipped", r.clipped}};
}

namespace {

Json to_json(const StrategyOutcome& s) {
  Json j = {{"value", opt(s.value)}, {"current", s.current}};
  j["note"] = s.note.empty() ? Json(nullptr) : Json(s.note);
  return j;
}

}  // namespace

Json to_json(const StrategyReport& r) {
  return {{"groups", {{"b", r.group_b}, {"w", r.group_w}}},
          {"threshold", r.threshold},
          {"equalize_fpr", to_json(r.equalize_fpr)},
          {"equalize_fnr", to_json(r.equalize_fnr)},
          {"equalize_both", to_json(r.equalize_both)}};
}

Json to_json(const FitResult& f) {
  Json coefs = Json::array();
  for (const auto& c : f.coefficients) {
    coefs.push_back({{"name", c.name},
                     {"estimate", c.estimate},
                     {"std_error", c.std_error},
                     {"z", c.z},
                     {"p_value", c.p_value},
                     {"odds_ratio", odds_ratio(f, c.name)}});
  }
  return {{"coefficients", std::move(coefs)},
          {"status", std::string(to_string(f.status))},
          {"iterations", f.iterations},
          {"log_likelihood", f.log_likelihood},
          {"n", f.n}};
}

// ---------------------------------------------------------------- Audit

namespace {

template <class F>
Json criterion_or_null(F&& f) {
  try {
    return to_json(f());
  } catch (const DataError& e) {
    return {{"undefined", e.what()}};
  }
}

}  // namespace

AuditReport build_audit(const Dataset& ds, const AuditOptions& options) {
  const Schema& schema = ds.schema();
  if (options.cutoff < schema.score_min - 1 || options.cutoff > schema.score_max) {
    throw std::invalid_argument("cutoff " + std::to_string(options.cutoff) + " outside [" +
                                std::to_string(schema.score_min - 1) + ", " + std::to_string(schema.score_max) + "]");
  }
  AuditReport out;
  Json& doc = out.document;
  doc["tool"] = {{"name", "fairaudit"}, {"version", tool_version()}};
  doc["provenance"] = to_json(ds.provenance());
  doc["settings"] = {{"cutoff", options.cutoff},
                     {"ci_level", options.ci_level},
                     {"tolerance", options.tolerance},
                     {"seed", options.seed ? Json(*options.seed) : Json(nullptr)}};
  doc["score_range"] = {schema.score_min, schema.score_max};

  const auto groups = ds.groups();
  Json counts = Json::object();
  for (const auto& g : groups) counts[g] = ds.count(g);
  doc["groups"] = groups;
  doc["counts"] = counts;

  // Per-group sweep.
  const auto sweep = threshold_sweep(ds, options.ci_level);
  Json sweep_json = Json::object();
  TableExport sweep_table{"sweep",
                          {"group", "cutoff", "n", "tn", "fp", "fn", "tp", "prevalence", "ppv", "ppv_lo", "ppv_hi",
                           "fpr", "fpr_lo", "fpr_hi", "fnr", "fnr_lo", "fnr_hi", "high_risk_rate"},
                          {}};
  for (const auto& gs : sweep) {
    Json rows = Json::array();
    for (const auto& m : gs.cutoffs) {
      rows.push_back(to_json(m));
      const auto lo = [](const std::optional<Interval>& i) { return i ? format_number(i->lo) : std::string(); };
      const auto hi = [](const std::optional<Interval>& i) { return i ? format_number(i->hi) : std::string(); };
      sweep_table.rows.push_back({gs.group, std::to_string(m.threshold), cell(m.matrix.total()), cell(m.matrix.tn),
                                  cell(m.matrix.fp), cell(m.matrix.fn), cell(m.matrix.tp), cell(m.prevalence),
                                  cell(m.ppv), lo(m.intervals.ppv), hi(m.intervals.ppv), cell(m.fpr),
                                  lo(m.intervals.fpr), hi(m.intervals.fpr), cell(m.fnr), lo(m.intervals.fnr),
                                  hi(m.intervals.fnr), cell(m.high_risk_rate)});
    }
    sweep_json[gs.group] = std::move(rows);
  }
  doc["sweep"] = std::move(sweep_json);

  const auto curve = calibration_curve(ds, options.ci_level);
  Json curve_json = Json::array();
  TableExport curve_table{"calibration", {"group", "score", "n", "positives", "estimate", "lo", "hi"}, {}};
  for (const auto& c : curve) {
    curve_json.push_back(to_json(c));
    curve_table.rows.push_back({c.group, std::to_string(c.score), cell(c.n), cell(c.positives), cell(c.estimate),
                                c.interval ? format_number(c.interval->lo) : "",
                                c.interval ? format_number(c.interval->hi) : ""});
  }
  doc["calibration_curve"] = std::move(curve_json);

  TableExport criteria_table{"criteria", {"criterion", "cutoff", "max_abs_gap", "tolerance", "satisfied"}, {}};
  if (groups.size() < 2) {
    doc["comparison"] = nullptr;
    doc["criteria"] = nullptr;
    doc["impossibility"] = nullptr;
    doc["strategies"] = nullptr;
    doc["distribution"] = nullptr;
    out.tables = {std::move(sweep_table), std::move(curve_table)};
    return out;
  }

  const GroupPair pair = options.groups.value_or(default_pair(ds));
  doc["comparison"] = pair_json(pair);
  const double tol = options.tolerance;

  Json criteria = Json::object();
  const auto add_row = [&](const Json& r) {
    if (r.contains("undefined")) return;
    criteria_table.rows.push_back({r["criterion"].get<std::string>(),
                                   r["threshold"].is_null() ? "" : std::to_string(r["threshold"].get<int>()),
                                   format_number(r["max_abs_gap"].get<double>()),
                                   format_number(r["tolerance"].get<double>()),
                                   r["satisfied"].get<bool>() ? "true" : "false"});
  };
  {
    Json cal = criterion_or_null([&] { return check_calibration(ds, pair, tol); });
    add_row(cal);
    criteria["calibration"] = std::move(cal);
  }
  struct Thresholded {
    const char* key;
    CriterionResult (*check)(const Dataset&, const GroupPair&, int, double);
  };
  const Thresholded thresholded[] = {{"predictive_parity", &check_predictive_parity},
                                     {"error_rate_balance", &check_error_rate_balance},
                                     {"statistical_parity", &check_statistical_parity}};
  for (const auto& t : thresholded) {
    Json by_cutoff = Json::array();
    for (int c = schema.score_min - 1; c <= schema.score_max - 1; ++c) {
      Json r = criterion_or_null([&] { return t.check(ds, pair, c, tol); });
      if (r.contains("undefined")) r["threshold"] = c;
      add_row(r);
      by_cutoff.push_back(std::move(r));
    }
    criteria[t.key] = std::move(by_cutoff);
  }
  doc["criteria"] = std::move(criteria);

  const auto gb = group_metrics(ds, pair.b, options.cutoff, options.ci_level);
  const auto gw = group_metrics(ds, pair.w, options.cutoff, options.ci_level);
  try {
    doc["impossibility"] = to_json(impossibility_report(gb, gw, tol));
  } catch (const DataError& e) {
    doc["impossibility"] = {{"undefined", e.what()}};
  }
  try {
    doc["strategies"] = to_json(strategy_report(gb, gw));
  } catch (const DataError& e) {
    doc["strategies"] = {{"undefined", e.what()}};
  }
  try {
    doc["distribution"] = {{"cohens_d", cohens_d(ds, pair)},
                           {"tv", tv_distance(score_distribution(ds, pair.b), score_distribution(ds, pair.w))}};
  } catch (const DataError& e) {
    doc["distribution"] = {{"undefined", e.what()}};
  }

  out.tables = {std::move(sweep_table), std::move(criteria_table), std::move(curve_table)};
  return out;
}

// ---------------------------------------------------------------- Impact

ImpactSection build_impact(const Dataset& ds, const ImpactOptions& options) {
  options.policy.validate();
  const GroupPair pair = options.groups.value_or(default_pair(ds));
  ImpactSection out;
  Json& doc = out.document;
  doc["tool"] = {{"name", "fairaudit"}, {"version", tool_version()}};
  doc["provenance"] = to_json(ds.provenance());
  doc["policy"] = to_json(options.policy);
  doc["comparison"] = pair_json(pair);
  doc["settings"] = {{"alpha", options.alpha}};

  TableExport table{"delta",
                    {"y1", "y2", "n_b", "n_w", "mean_b", "mean_w", "delta_empirical", "delta_closed_form", "tv",
                     "tv_bound"},
                    {}};
  Json deltas = Json::array();
  for (int y1 = 0; y1 <= 1; ++y1) {
    for (int y2 = 0; y2 <= 1; ++y2) {
      try {
        const auto r = delta(ds, options.policy, y1, y2, pair);
        deltas.push_back(to_json(r));
        table.rows.push_back({outcome_label(y1), outcome_label(y2), cell(r.n_b), cell(r.n_w), cell(r.mean_b),
                              cell(r.mean_w), cell(r.delta_empirical), cell(r.delta_closed_form), cell(r.tv),
                              cell(r.tv_bound)});
      } catch (const DataError& e) {
        deltas.push_back({{"y1", y1}, {"y2", y2}, {"undefined", e.what()}});
      }
    }
  }
  doc["delta"] = std::move(deltas);
  out.tables.push_back(std::move(table));

  if (options.sentencing) {
    const auto a = sentencing_analysis(ds, *options.sentencing, options.policy.kind, options.policy.s_hr, pair,
                                       options.alpha);
    doc["sentencing"] = to_json(a);
    TableExport st{"sentencing",
                   {"ogs", "outcome", "t_min", "t_max", "n_b", "mean_b", "n_w", "mean_w", "delta",
                    "delta_closed_form", "welch_t", "welch_df", "p_value", "significant"},
                   {}};
    for (const auto& r : a.rows) {
      st.rows.push_back({r.ogs, outcome_label(r.outcome), cell(r.range.t_min), cell(r.range.t_max), cell(r.b.n),
                         cell(r.b.mean), cell(r.w.n), cell(r.w.mean), cell(r.delta), cell(r.delta_closed_form),
                         r.welch ? cell(r.welch->t) : "", r.welch ? cell(r.welch->df) : "",
                         r.welch ? cell(r.welch->p_value) : "", r.significant ? "true" : "false"});
    }
    out.tables.push_back(std::move(st));
  } else {
    doc["sentencing"] = nullptr;
  }
  return out;
}

// ---------------------------------------------------------------- Region

std::vector<RegionSample> sample_region(const FeasibleRegion& region, int resolution) {
  if (resolution < 1) throw std::invalid_argument("region resolution must be at least 1");
  std::vector<RegionSample> out;
  out.reserve(static_cast<std::size_t>(resolution) + 1);
  for (int i = 0; i <= resolution; ++i) {
    const double fnr = static_cast<double>(i) / resolution;
    out.push_back({region.delta, fnr, region.lower_fpr(fnr), region.upper_fpr(fnr)});
  }
  return out;
}

RegionSection build_region(const RegionOptions& options) {
  RegionSection out;
  Json& doc = out.document;
  doc["tool"] = {{"name", "fairaudit"}, {"version", tool_version()}};
  doc["settings"] = {{"prevalence", options.prevalence}, {"ppv", options.ppv}, {"resolution", options.resolution}};
  doc["line"] = to_json(feasible_line(options.prevalence, options.ppv));

  TableExport table{"region", {"delta", "fnr", "fpr_lower", "fpr_upper"}, {}};
  Json bands = Json::array();
  for (double d : options.deltas) {
    const auto region = feasible_region(options.prevalence, options.ppv, d);
    Json samples = Json::array();
    for (const auto& s : sample_region(region, options.resolution)) {
      samples.push_back({s.fnr, s.fpr_lower, s.fpr_upper});
      table.rows.push_back({cell(s.delta), cell(s.fnr), cell(s.fpr_lower), cell(s.fpr_upper)});
    }
    Json band = to_json(region);
    band["samples"] = std::move(samples);
    band["sample_columns"] = {"fnr", "fpr_lower", "fpr_upper"};
    bands.push_back(std::move(band));
  }
  doc["bands"] = std::move(bands);
  doc["strategies"] = opt_json(options.strategies);
  out.tables.push_back(std::move(table));
  return out;
}

// ---------------------------------------------------------------- Regress

RegressSection build_regress(const Dataset& ds, const std::vector<std::pair<std::string, DesignSpec>>& models) {
  RegressSection out;
  Json& doc = out.document;
  doc["tool"] = {{"name", "fairaudit"}, {"version", tool_version()}};
  doc["provenance"] = to_json(ds.provenance());
  TableExport table{"coefficients", {"model", "term", "Estimate", "Std. Error", "z value", "Pr(>|z|)", "odds_ratio"}, {}};
  Json fits = Json::object();
  for (const auto& [name, spec] : models) {
    const Design design = build_design(ds, spec);
    const FitResult fit = fit_logistic(design);
    Json j = to_json(fit);
    j["response_cutoff"] = spec.response_cutoff;
    j["subset_outcome"] = spec.subset_outcome ? Json(*spec.subset_outcome) : Json(nullptr);
    j["excluded_missing"] = design.excluded_missing;
    fits[name] = std::move(j);
    for (const auto& c : fit.coefficients) {
      table.rows.push_back({name, c.name, cell(c.estimate), cell(c.std_error), cell(c.z), cell(c.p_value),
                            cell(odds_ratio(fit, c.name))});
    }
  }
  doc["models"] = std::move(fits);
  out.tables.push_back(std::move(table));
  return out;
}

// ---------------------------------------------------------------- Synth

Json synth_summary(const PopulationSpec& spec, const Dataset& generated) {
  Json groups = Json::object();
  for (const auto& g : spec.groups) {
    groups[g.label] = {{"size", g.size}, {"prevalence", g.prevalence}, {"records", generated.count(g.label)}};
  }
  return {{"tool", {{"name", "fairaudit"}, {"version", tool_version()}}},
          {"seed", spec.seed},
          {"mode", spec.mode == GenerationMode::exact ? "exact" : "sampled"},
          {"score_range", {spec.score_min, spec.score_max}},
          {"records", generated.size()},
          {"groups", std::move(groups)}};
}

}  // namespace fairaudit
