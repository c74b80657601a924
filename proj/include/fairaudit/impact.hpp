#pragma once

// Penalty policies driven by the risk score and the disparate impact they
// create: Delta(y1, y2) = E[T | b, Y = y1] - E[T | w, Y = y2].

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/config.hpp"
#include "fairaudit/dataset.hpp"
#include "fairaudit/metrics.hpp"

namespace fairaudit {

enum class PolicyKind { minmax, interpolation };

std::string_view to_string(PolicyKind k);
PolicyKind parse_policy_kind(std::string_view text);

struct PenaltyPolicy {
  PolicyKind kind = PolicyKind::minmax;
  double t_min = 0.0;
  double t_max = 1.0;
  int s_hr = 4;  // minmax only
  int score_min = 1;
  int score_max = 10;

  // High-risk (score > s_hr) receives t_max, everyone else t_min.
  static PenaltyPolicy minmax(double t_min, double t_max, int s_hr, int score_min = 1, int score_max = 10);
  // t_min + (score - score_min) / (score_max - score_min) * (t_max - t_min).
  static PenaltyPolicy interpolation(double t_min, double t_max, int score_min = 1, int score_max = 10);

  void validate() const;
};

double apply_policy(const PenaltyPolicy& policy, int score);

// Empirical probability mass function over an integer score support.
struct ScoreDistribution {
  int score_min = 1;
  int score_max = 10;
  std::vector<double> pmf;
  std::int64_t n = 0;  // records behind an empirical pmf, 0 if synthetic

  double at(int score) const { return pmf.at(static_cast<std::size_t>(score - score_min)); }
};

// Scores of `group`, optionally restricted to one outcome. DataError if the
// stratum is empty.
ScoreDistribution score_distribution(const Dataset& ds, std::string_view group, std::optional<int> outcome = {});

double tv_distance(const ScoreDistribution& f, const ScoreDistribution& g);
double expected_penalty(const PenaltyPolicy& policy, const ScoreDistribution& f);
double cohens_d(const Dataset& ds, const GroupPair& groups);
double cohens_d(const Dataset& ds);

// (t_max - t_min) * d_TV(f_b, f_w); requires a minmax policy.
double overlap_bound(const PenaltyPolicy& policy, const ScoreDistribution& f_b, const ScoreDistribution& f_w);

struct ImpactReport {
  PolicyKind kind = PolicyKind::minmax;
  std::string group_b;
  std::string group_w;
  int y1 = 0;
  int y2 = 0;
  std::int64_t n_b = 0;
  std::int64_t n_w = 0;
  double mean_b = 0.0;
  double mean_w = 0.0;
  double delta_empirical = 0.0;
  // Minmax only: (t_max - t_min) * (P(S > s_hr | b, y1) - P(S > s_hr | w, y2)).
  std::optional<double> delta_closed_form;
  std::optional<double> high_risk_b;
  std::optional<double> high_risk_w;
  double tv = 0.0;        // d_TV(f_{b,y1}, f_{w,y2})
  double tv_bound = 0.0;  // (t_max - t_min) * tv
};

ImpactReport delta(const Dataset& ds, const PenaltyPolicy& policy, int y1, int y2, const GroupPair& groups);
ImpactReport delta(const Dataset& ds, const PenaltyPolicy& policy, int y1, int y2);

// ---------------------------------------------------------------- Sentencing

struct PenaltyRange {
  double t_min = 0.0;
  double t_max = 0.0;
};

// Penalty ranges per offense gravity score (OGS) and the charge-degree to
// OGS mapping. File keys:
//   charge_covariate = c_charge_degree
//   prior_record_score = 1
//   range.<ogs> = <t_min>, <t_max>
//   degree.<charge degree> = <ogs>      (defaults to M2:2 M1:3 F3:5 F2:7 F1:8)
struct SentencingConfig {
  std::string charge_covariate = "c_charge_degree";
  int prior_record_score = 1;
  std::map<std::string, PenaltyRange> ranges;
  std::map<std::string, std::string> degree_to_ogs = default_degree_map();

  static std::map<std::string, std::string> default_degree_map();
  static SentencingConfig from_config(const KeyValueConfig& cfg);
  static SentencingConfig load(const std::filesystem::path& path);
  void validate() const;
  // OGS labels with a range, numeric labels in numeric order.
  std::vector<std::string> ogs_order() const;
};

struct WelchTest {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // two-sided
};

// Two-sample Welch t test; nullopt when either sample has fewer than 2 values.
std::optional<WelchTest> welch_test(std::span<const double> a, std::span<const double> b);

struct StratumSummary {
  std::int64_t n = 0;
  std::optional<double> mean;
  std::optional<double> sd;
  Rate high_risk_rate;  // P(S > s_hr) in the stratum
};

struct SentencingRow {
  std::string ogs;
  int outcome = 0;
  PenaltyRange range;
  StratumSummary b;
  StratumSummary w;
  std::optional<double> delta;              // mean_b - mean_w
  std::optional<double> delta_closed_form;  // minmax only
  std::optional<WelchTest> welch;
  bool significant = false;
};

struct SentencingAnalysis {
  PolicyKind kind = PolicyKind::minmax;
  int s_hr = 4;
  double alpha = 0.01;
  GroupPair groups;
  int prior_record_score = 1;
  std::vector<SentencingRow> rows;  // by OGS order, then outcome 0, 1
  std::int64_t excluded_missing = 0;
};

SentencingAnalysis sentencing_analysis(const Dataset& ds, const SentencingConfig& cfg, PolicyKind kind, int s_hr,
                                       const GroupPair& groups, double alpha = 0.01);

}  // namespace fairaudit
