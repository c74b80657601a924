// Acceptance report: one PASS / FAIL / SKIP line per criterion, tolerances
// pinned below. Exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fairaudit/dataset.hpp"
#include "fairaudit/fairness.hpp"
#include "fairaudit/impact.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/regress.hpp"
#include "fairaudit/synth.hpp"
#include "fairaudit/tradeoff.hpp"

using namespace fairaudit;
namespace fs = std::filesystem;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
  Verdict verdict = Verdict::pass;
  std::string detail;
};

struct Check {
  int id;
  std::string name;
  double budget_s;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

// ------------------------------------------------------------------ Data

const fs::path kData = FAIRAUDIT_DATA_FILE;

Schema compas_schema(bool whitelist) {
  Schema s;
  s.group_column = "race";
  s.score_column = "decile_score";
  s.outcome_column = "two_year_recid";
  s.score_min = 1;
  s.score_max = 10;
  if (whitelist) s.groups = {"African-American", "Caucasian"};
  s.missing_tokens = {"", "NA"};
  s.covariates = {{"age", "age", CovariateKind::numeric},
                  {"sex", "sex", CovariateKind::categorical},
                  {"priors_count", "priors_count", CovariateKind::numeric},
                  {"c_charge_degree", "c_charge_degree", CovariateKind::categorical},
                  {"days_b_screening_arrest", "days_b_screening_arrest", CovariateKind::numeric},
                  {"is_recid", "is_recid", CovariateKind::numeric},
                  {"score_text", "score_text", CovariateKind::categorical}};
  return s;
}

const GroupPair kPair{"African-American", "Caucasian"};

// The two-year file restricted to the compared groups.
const Dataset& cohort() {
  static const Dataset ds = restrict_groups(load_csv(kData, compas_schema(false)), {kPair.b, kPair.w});
  return ds;
}

Outcome skip_without_data() { return {Verdict::skip, "data file not found: " + kData.string()}; }

// ------------------------------------------------------------------ Criteria

Outcome c1_reconstruction() {
  if (!fs::exists(kData)) return skip_without_data();
  const Dataset raw = load_csv(kData, compas_schema(false));
  const Dataset f = apply_propublica_filters(raw);
  const auto n = static_cast<long>(f.size());
  const auto nb = static_cast<long>(f.count(kPair.b)), nw = static_cast<long>(f.count(kPair.w));
  const bool ok = n == 6150 && nb == 3696 && nw == 2454;
  std::ostringstream d;
  d << "apply_propublica_filters -> " << n << " (" << nb << "/" << nw << "), expected 6150 (3696/2454), delta "
    << (n - 6150) << "; two groups without filters -> " << cohort().size() << " (" << cohort().count(kPair.b) << "/"
    << cohort().count(kPair.w) << ")";
  return {ok ? Verdict::pass : Verdict::fail, d.str()};
}

Outcome c2_prevalence() {
  if (!fs::exists(kData)) return skip_without_data();
  const double pb = group_metrics(cohort(), kPair.b, 4).prevalence;
  const double pw = group_metrics(cohort(), kPair.w, 4).prevalence;
  const bool ok = within(pb, 0.51, 0.005) && within(pw, 0.39, 0.005);
  return {ok ? Verdict::pass : Verdict::fail, "p_b = " + fmt(pb) + " (0.51 +- 0.005), p_w = " + fmt(pw) + " (0.39 +- 0.005)"};
}

Outcome c3_ppv() {
  if (!fs::exists(kData)) return skip_without_data();
  const double ppv = *group_metrics(cohort(), kPair.w, 4).ppv;
  return {within(ppv, 0.591, 0.005) ? Verdict::pass : Verdict::fail, "PPV_w(4) = " + fmt(ppv) + " (0.591 +- 0.005)"};
}

Outcome c4_pattern() {
  if (!fs::exists(kData)) return skip_without_data();
  const Dataset& ds = cohort();
  // Sweep with Wilson intervals, as an audit would.
  const auto sweep = threshold_sweep(ds, 0.95);
  (void)sweep;
  std::vector<int> pp_fail, erb_fail;
  std::ostringstream gaps;
  for (int c = 4; c <= 9; ++c) {
    const double g = check_predictive_parity(ds, kPair, c, 0.05).max_abs_gap;
    if (!(g <= 0.05)) pp_fail.push_back(c);
  }
  for (int c = 0; c <= 9; ++c) {
    const double g = check_error_rate_balance(ds, kPair, c, 0.05).max_abs_gap;
    if (!(g > 0.05)) erb_fail.push_back(c);
  }
  std::ostringstream d;
  auto list = [](const std::vector<int>& v) {
    std::string s;
    for (int c : v) s += (s.empty() ? "" : ",") + std::to_string(c);
    return s.empty() ? std::string("none") : s;
  };
  d << "PP gap <= 0.05 fails at cutoffs {" << list(pp_fail) << "}";
  if (!pp_fail.empty()) d << " (gap at 9 = " << fmt(check_predictive_parity(ds, kPair, 9).max_abs_gap) << ")";
  d << "; ERB gap > 0.05 fails at cutoffs {" << list(erb_fail) << "}";
  if (!erb_fail.empty()) d << " (gap at 0 = " << fmt(check_error_rate_balance(ds, kPair, 0).max_abs_gap) << ")";
  return {pp_fail.empty() && erb_fail.empty() ? Verdict::pass : Verdict::fail, d.str()};
}

Outcome c5_distribution() {
  if (!fs::exists(kData)) return skip_without_data();
  const double d = cohens_d(cohort(), kPair);
  const double tv = tv_distance(score_distribution(cohort(), kPair.b), score_distribution(cohort(), kPair.w));
  const bool ok = within(d, 0.60, 0.01) && within(tv, 0.245, 0.005);
  return {ok ? Verdict::pass : Verdict::fail, "d = " + fmt(d) + " (0.60 +- 0.01), d_TV = " + fmt(tv) + " (0.245 +- 0.005)"};
}

DesignSpec table_spec(bool adjusted) {
  DesignSpec spec;
  spec.response_cutoff = 4;
  spec.subset_outcome = 0;
  spec.predictors.push_back({"race", "@group", CovariateKind::categorical, kPair.w, {{kPair.b, "Black"}}});
  if (adjusted) {
    spec.predictors.push_back({"Age", "age", CovariateKind::numeric, "", {}});
    spec.predictors.push_back({"sex", "sex", CovariateKind::categorical, "Female", {}});
    spec.predictors.push_back({"Number of Priors", "priors_count", CovariateKind::numeric, "", {}});
    spec.predictors.push_back({"charge", "c_charge_degree", CovariateKind::categorical, "F", {{"M", "Misdemeanor"}}});
  }
  return spec;
}

Outcome c6_regression() {
  if (!fs::exists(kData)) return skip_without_data();
  const auto t5 = fit_logistic(build_design(cohort(), table_spec(false)));
  const auto t6 = fit_logistic(build_design(cohort(), table_spec(true)));
  const std::vector<std::pair<std::string, double>> want5 = {{"(Intercept)", -1.183}, {"raceBlack", 0.976}};
  const std::vector<std::pair<std::string, double>> want6 = {{"(Intercept)", 1.397}, {"raceBlack", 0.547},
                                                             {"Age", -0.079},        {"sexMale", -0.291},
                                                             {"Number of Priors", 0.283}, {"chargeMisdemeanor", -0.109}};
  bool ok = t5.converged() && t6.converged();
  double worst = 0.0;
  for (const auto& [name, v] : want5) worst = std::max(worst, std::abs(t5.coefficient(name).estimate - v));
  for (const auto& [name, v] : want6) worst = std::max(worst, std::abs(t6.coefficient(name).estimate - v));
  ok = ok && worst <= 0.02;
  const double or5 = odds_ratio(t5, "raceBlack"), or6 = odds_ratio(t6, "raceBlack");
  const bool or_ok = within(or5, 2.6, 0.05) && within(or6, 1.72, 0.05);
  std::ostringstream d;
  d << "max coefficient error " << fmt(worst) << " (<= 0.02); odds ratios " << fmt(or5, 3) << " (2.6 +- 0.05"
    << (within(or5, 2.6, 0.05) ? "" : ", outside; exp(0.976) = " + fmt(std::exp(0.976), 3)) << "), " << fmt(or6, 3)
    << " (1.72 +- 0.05)";
  return {ok && or_ok ? Verdict::pass : Verdict::fail, d.str()};
}

Outcome c7_identity() {
  std::mt19937_64 rng(20240701);
  std::uniform_int_distribution<std::int64_t> count(1, 100000);
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const ConfusionMatrix m{count(rng), count(rng), count(rng), count(rng)};
    worst = std::max(worst, std::abs(implied_fpr(*m.prevalence(), *m.ppv(), *m.fnr()) - *m.fpr()));
  }
  return {worst <= 1e-12 ? Verdict::pass : Verdict::fail, "10000 matrices, max |implied - FPR| = " + sci(worst) + " (<= 1e-12)"};
}

Outcome c8_impossibility() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int built = 0, attempts = 0, zero_gap = 0, flagged = 0;
  double smallest = 1.0;
  while (built < 100 && attempts < 100000) {
    ++attempts;
    const double pb = 0.05 + 0.9 * u(rng), pw = 0.05 + 0.9 * u(rng);
    if (std::abs(pb - pw) < 0.05) continue;
    ParityOptions o;
    o.fnr_b = 0.01 + 0.93 * u(rng);
    o.fnr_w = 0.01 + 0.93 * u(rng);
    o.seed = static_cast<std::uint64_t>(attempts);
    const double ppv = 0.2 + 0.79 * u(rng);
    ParityInstrument inst;
    try {
      inst = construct_parity_instrument(pb, pw, 4, ppv, 1, 10, o);
    } catch (const std::domain_error&) {
      continue;
    }
    const Dataset ds = generate(inst.spec);
    const auto b = group_metrics(ds, "b", 4), w = group_metrics(ds, "w", 4);
    if (std::abs(b.prevalence - w.prevalence) < 0.05) continue;
    ++built;
    const double gap = std::max(std::abs(*b.fpr - *w.fpr), std::abs(*b.fnr - *w.fnr));
    smallest = std::min(smallest, gap);
    if (!(gap > 0.0)) ++zero_gap;
    if (impossibility_report(b, w).error_rate_balance_impossible) ++flagged;
  }
  const bool ok = built == 100 && zero_gap == 0;
  return {ok ? Verdict::pass : Verdict::fail, std::to_string(built) + " instruments, " + std::to_string(zero_gap) +
                                                  " with zero error-rate gap, smallest gap " + sci(smallest) + ", " +
                                                  std::to_string(flagged) + " flagged impossible"};
}

PopulationSpec random_population(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PopulationSpec spec;
  spec.score_min = 1;
  spec.score_max = 10;
  spec.seed = rng();
  spec.mode = u(rng) < 0.5 ? GenerationMode::exact : GenerationMode::sampled;
  for (const char* label : {"b", "w"}) {
    GroupSpec g;
    g.label = label;
    g.size = std::uniform_int_distribution<std::int64_t>(50, 2000)(rng);
    g.prevalence = 0.1 + 0.8 * u(rng);
    for (auto* pmf : {&g.pmf_negative, &g.pmf_positive}) {
      pmf->resize(10);
      double total = 0.0;
      for (double& v : *pmf) total += (v = 0.05 + u(rng));
      for (double& v : *pmf) v /= total;
    }
    spec.groups.push_back(std::move(g));
  }
  return spec;
}

Outcome c9_closed_form() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  double worst_closed = 0.0, worst_c1 = 0.0, worst_c2 = 0.0;
  int used = 0;
  for (int t = 0; t < 1000; ++t) {
    const Dataset ds = generate(random_population(rng));
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const int cut = std::uniform_int_distribution<int>(0, 10)(rng);
    const auto policy = PenaltyPolicy::minmax(a, b, cut);
    for (int y1 = 0; y1 <= 1; ++y1) {
      for (int y2 = 0; y2 <= 1; ++y2) {
        const auto r = delta(ds, policy, y1, y2, {"b", "w"});
        worst_closed = std::max(worst_closed, std::abs(r.delta_empirical - *r.delta_closed_form));
      }
    }
    const auto mb = group_metrics(ds, "b", cut), mw = group_metrics(ds, "w", cut);
    worst_c1 = std::max(worst_c1, std::abs(delta(ds, policy, 0, 0).delta_empirical - (b - a) * (*mb.fpr - *mw.fpr)));
    worst_c2 = std::max(worst_c2, std::abs(delta(ds, policy, 1, 1).delta_empirical - (b - a) * (*mw.fnr - *mb.fnr)));
    ++used;
  }
  const bool ok = worst_closed <= 1e-12 && worst_c1 <= 1e-12 && worst_c2 <= 1e-12;
  return {ok ? Verdict::pass : Verdict::fail, std::to_string(used) + " datasets; max error closed form " +
                                                  sci(worst_closed) + ", FPR form " + sci(worst_c1) +
                                                  ", FNR form " + sci(worst_c2) + " (<= 1e-12)"};
}

Outcome c10_overlap_bound() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto pmf = [&] {
    ScoreDistribution f{1, 10, std::vector<double>(10), 0};
    double total = 0.0;
    for (double& v : f.pmf) total += (v = u(rng) < 0.2 ? 0.0 : u(rng));
    if (total == 0.0) f.pmf[0] = total = 1.0;
    for (double& v : f.pmf) v /= total;
    return f;
  };
  int violations = 0;
  double tightest = 1.0;
  for (int t = 0; t < 1000; ++t) {
    const auto f = pmf(), g = pmf();
    double a = 50.0 * u(rng), b = 50.0 * u(rng);
    if (a > b) std::swap(a, b);
    const auto policy = PenaltyPolicy::minmax(a, b, std::uniform_int_distribution<int>(0, 10)(rng));
    const double d = expected_penalty(policy, f) - expected_penalty(policy, g);
    const double bound = overlap_bound(policy, f, g);
    if (std::abs(d) > bound + 1e-12) ++violations;
    if (bound > 0) tightest = std::min(tightest, (bound - std::abs(d)) / bound);
  }
  // Tightness: f entirely above the cutoff, g entirely at or below it.
  const ScoreDistribution above{1, 10, {0, 0, 0, 0, 0, 0.1, 0.2, 0.3, 0.25, 0.15}, 0};
  const ScoreDistribution below{1, 10, {0.3, 0.25, 0.2, 0.15, 0.1, 0, 0, 0, 0, 0}, 0};
  const auto policy = PenaltyPolicy::minmax(3, 15, 5);
  const double gap = std::abs(expected_penalty(policy, above) - expected_penalty(policy, below) -
                              overlap_bound(policy, above, below));
  const bool ok = violations == 0 && gap <= 1e-12;
  return {ok ? Verdict::pass : Verdict::fail, "1000 pmf pairs, " + std::to_string(violations) +
                                                  " violations; tightness case |Delta - bound| = " + sci(gap) +
                                                  " (<= 1e-12)"};
}

Outcome c11_strategy() {
  if (!fs::exists(kData)) return skip_without_data();
  const auto b = group_metrics(cohort(), kPair.b, 4), w = group_metrics(cohort(), kPair.w, 4);
  const auto r = strategy_report(b, w);
  if (!r.equalize_fpr.value) return {Verdict::fail, "no solution: " + r.equalize_fpr.note};
  const double fnr = *r.equalize_fpr.value;
  return {within(fnr, 0.7, 0.05) ? Verdict::pass : Verdict::fail,
          "p_b = " + fmt(b.prevalence) + ", PPV_w = " + fmt(*w.ppv) + ", FPR_w = " + fmt(*w.fpr) +
              " -> FNR_b = " + fmt(fnr) + " (0.7 +- 0.05)"};
}

Outcome c12_irls() {
  // Saturated 2x2: a binary predictor with cell counts.
  const int n00 = 137, n01 = 58, n10 = 71, n11 = 102;
  const int n = n00 + n01 + n10 + n11;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  int i = 0;
  for (auto [count, xv, yv] : {std::tuple{n00, 0, 0}, {n01, 0, 1}, {n10, 1, 0}, {n11, 1, 1}}) {
    for (int c = 0; c < count; ++c, ++i) {
      x(i, 0) = 1;
      x(i, 1) = xv;
      y(i) = yv;
    }
  }
  const auto sat = fit_logistic({"(Intercept)", "x"}, x, y);
  const double b0 = std::log(double(n01) / n00), b1 = std::log(double(n11) / n10) - b0;
  const double se1 = std::sqrt(1.0 / n00 + 1.0 / n01 + 1.0 / n10 + 1.0 / n11);
  const double sat_err = std::max({std::abs(sat.coefficients[0].estimate - b0), std::abs(sat.coefficients[1].estimate - b1),
                                   std::abs(sat.coefficients[1].std_error - se1)});

  // Random designs: score equations and finite-difference Hessian.
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_score = 0.0, worst_se = 0.0;
  for (int t = 0; t < 3; ++t) {
    const int m = 1000;
    Eigen::MatrixXd xr(m, 3);
    Eigen::VectorXd yr(m);
    for (int r = 0; r < m; ++r) {
      xr(r, 0) = 1;
      xr(r, 1) = z(rng);
      xr(r, 2) = u(rng) < 0.3 ? 1 : 0;
      const double eta = -0.4 + 0.9 * xr(r, 1) - 0.7 * xr(r, 2);
      yr(r) = u(rng) < 1 / (1 + std::exp(-eta)) ? 1 : 0;
    }
    const auto fit = fit_logistic({"(Intercept)", "a", "b"}, xr, yr);
    Eigen::VectorXd beta(3);
    for (int j = 0; j < 3; ++j) beta(j) = fit.coefficients[j].estimate;
    Eigen::VectorXd mu(m);
    for (int r = 0; r < m; ++r) mu(r) = 1 / (1 + std::exp(-xr.row(r).dot(beta)));
    worst_score = std::max(worst_score, (xr.transpose() * (yr - mu)).cwiseAbs().maxCoeff());
    Eigen::MatrixXd h(3, 3);
    const double e = 1e-4;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        auto ll = [&](double da, double db) {
          Eigen::VectorXd v = beta;
          v(a) += da;
          v(b) += db;
          return log_likelihood(xr, yr, v);
        };
        h(a, b) = (ll(e, e) - ll(e, -e) - ll(-e, e) + ll(-e, -e)) / (4 * e * e);
      }
    }
    const Eigen::MatrixXd cov = (-h).inverse();
    for (int j = 0; j < 3; ++j) {
      const double fd = std::sqrt(cov(j, j));
      worst_se = std::max(worst_se, std::abs(fit.coefficients[j].std_error - fd) / fd);
    }
  }
  const bool ok = sat_err <= 1e-8 && worst_score <= 1e-6 && worst_se <= 1e-4;
  return {ok ? Verdict::pass : Verdict::fail, "saturated error " + sci(sat_err) + " (<= 1e-8), score equations " +
                                                  sci(worst_score) + " (<= 1e-6), SE vs FD Hessian " + sci(worst_se) +
                                                  " relative (<= 1e-4)"};
}

Outcome c13_sentencing_structure() {
  if (!fs::exists(kData)) return skip_without_data();
  SentencingConfig cfg;
  cfg.degree_to_ogs = {{"M", "3"}, {"F", "5"}};
  cfg.ranges = {{"3", {1, 12}}, {"5", {3, 18}}};
  const auto a = sentencing_analysis(cohort(), cfg, PolicyKind::minmax, 4, kPair);
  int checked = 0, mismatched = 0;
  std::ostringstream d;
  for (const auto& row : a.rows) {
    if (row.outcome != 0 || !row.delta) continue;
    std::vector<std::string> degrees;
    for (const auto& [deg, ogs] : cfg.degree_to_ogs) {
      if (ogs == row.ogs) degrees.push_back(deg);
    }
    CovariateFilter f;
    f.clauses.push_back({"c_charge_degree", degrees, std::nullopt});
    const Dataset stratum = filter(cohort(), f);
    const auto fb = group_metrics(stratum, kPair.b, 4).fpr, fw = group_metrics(stratum, kPair.w, 4).fpr;
    if (!fb || !fw) continue;
    ++checked;
    const double diff = *fb - *fw;
    const auto sign = [](double v) { return (v > 0) - (v < 0); };
    if (sign(*row.delta) != sign(diff)) ++mismatched;
    d << " OGS " << row.ogs << ": Delta = " << fmt(*row.delta, 3) << ", FPR_b - FPR_w = " << fmt(diff) << ";";
  }
  const bool ok = checked > 0 && mismatched == 0;
  return {ok ? Verdict::pass : Verdict::fail,
          std::to_string(checked) + " strata, " + std::to_string(mismatched) + " sign mismatches;" + d.str()};
}

}  // namespace

int main() {
  const std::vector<Check> criteria = {
      {1, "data reconstruction", 1.0, c1_reconstruction},
      {2, "prevalence reproduction", 0, c2_prevalence},
      {3, "PPV reproduction", 0, c3_ppv},
      {4, "criterion pattern", 5.0, c4_pattern},
      {5, "distribution statistics", 0, c5_distribution},
      {6, "regression reproduction", 2.0, c6_regression},
      {7, "identity property", 0, c7_identity},
      {8, "impossibility property", 0, c8_impossibility},
      {9, "closed-form impact", 0, c9_closed_form},
      {10, "overlap bound", 0, c10_overlap_bound},
      {11, "strategy (i)", 0, c11_strategy},
      {12, "IRLS oracle equivalence", 0, c12_irls},
      {13, "stratified impact structure", 0, c13_sentencing_structure},
  };
  // Load the data once up front so per-criterion timings exclude parsing
  // where the criterion does not ask for it.
  if (fs::exists(kData)) (void)cohort();

  int failed = 0, passed = 0, skipped = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Verdict::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt(secs, 3) + " s";
    if (c.budget_s > 0) {
      timing += " (< " + fmt(c.budget_s, 0) + " s)";
      if (o.verdict == Verdict::pass && secs >= c.budget_s) {
        o.verdict = Verdict::fail;
        o.detail += "; over time budget";
      }
    }
    const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::fail ? "FAIL" : "SKIP";
    std::printf("[%s] %2d %s: %s [%s]\n", tag, c.id, c.name.c_str(), o.detail.c_str(), timing.c_str());
    (o.verdict == Verdict::pass ? passed : o.verdict == Verdict::fail ? failed : skipped) += 1;
  }
  std::printf("%d passed, %d failed, %d skipped\n", passed, failed, skipped);
  return failed == 0 ? 0 : 1;
}
