#include "fairaudit/impact.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>

#include "fairaudit/error.hpp"
#include "summation.hpp"

namespace fairaudit {

using detail::CompensatedSum;

std::string_view to_string(PolicyKind k) { return k == PolicyKind::minmax ? "minmax" : "interpolation"; }

PolicyKind parse_policy_kind(std::string_view text) {
  if (text == "minmax") return PolicyKind::minmax;
  if (text == "interpolation") return PolicyKind::interpolation;
  throw ConfigError("unknown policy '" + std::string(text) + "' (expected minmax or interpolation)");
}

PenaltyPolicy PenaltyPolicy::minmax(double t_min, double t_max, int s_hr, int score_min, int score_max) {
  PenaltyPolicy p{PolicyKind::minmax, t_min, t_max, s_hr, score_min, score_max};
  p.validate();
  return p;
}

PenaltyPolicy PenaltyPolicy::interpolation(double t_min, double t_max, int score_min, int score_max) {
  PenaltyPolicy p{PolicyKind::interpolation, t_min, t_max, score_min - 1, score_min, score_max};
  p.validate();
  return p;
}

void PenaltyPolicy::validate() const {
  if (!(std::isfinite(t_min) && std::isfinite(t_max)) || t_min < 0.0 || t_min > t_max) {
    throw std::invalid_argument("penalty policy needs 0 <= t_min <= t_max");
  }
  if (score_min > score_max) throw std::invalid_argument("penalty policy: empty score range");
  if (kind == PolicyKind::interpolation && score_min == score_max) {
    throw std::invalid_argument("interpolation policy needs at least two score values");
  }
}

double apply_policy(const PenaltyPolicy& policy, int score) {
  if (score < policy.score_min || score > policy.score_max) {
    throw std::out_of_range("score " + std::to_string(score) + " outside policy range");
  }
  if (policy.kind == PolicyKind::minmax) return score > policy.s_hr ? policy.t_max : policy.t_min;
  const double frac = static_cast<double>(score - policy.score_min) / (policy.score_max - policy.score_min);
  return policy.t_min + frac * (policy.t_max - policy.t_min);
}

ScoreDistribution score_distribution(const Dataset& ds, std::string_view group, std::optional<int> outcome) {
  const Schema& s = ds.schema();
  ScoreDistribution f{s.score_min, s.score_max, std::vector<double>(s.score_max - s.score_min + 1, 0.0), 0};
  std::vector<std::int64_t> counts(f.pmf.size(), 0);
  for (const Record& r : ds.records()) {
    if (r.group != group || (outcome && r.outcome != *outcome)) continue;
    ++counts[r.score - s.score_min];
    ++f.n;
  }
  if (f.n == 0) {
    std::string what = "group '" + std::string(group) + "'";
    if (outcome) what += " with outcome " + std::to_string(*outcome);
    throw DataError("empty stratum: " + what);
  }
  for (std::size_t i = 0; i < counts.size(); ++i) f.pmf[i] = static_cast<double>(counts[i]) / f.n;
  return f;
}

double tv_distance(const ScoreDistribution& f, const ScoreDistribution& g) {
  if (f.score_min != g.score_min || f.score_max != g.score_max || f.pmf.size() != g.pmf.size()) {
    throw std::invalid_argument("tv_distance: distributions have different supports");
  }
  CompensatedSum sum;
  for (std::size_t i = 0; i < f.pmf.size(); ++i) sum.add(std::abs(f.pmf[i] - g.pmf[i]));
  return 0.5 * sum.value();
}

double expected_penalty(const PenaltyPolicy& policy, const ScoreDistribution& f) {
  CompensatedSum sum;
  for (int s = f.score_min; s <= f.score_max; ++s) sum.add(f.at(s) * apply_policy(policy, s));
  return sum.value();
}

double cohens_d(const Dataset& ds, const GroupPair& groups) {
  auto moments = [&](const std::string& g) {
    CompensatedSum sum;
    std::int64_t n = 0;
    for (const Record& r : ds.records()) {
      if (r.group == g) {
        sum.add(r.score);
        ++n;
      }
    }
    if (n < 2) throw DataError("cohens_d: group '" + g + "' needs at least 2 records");
    const double mean = sum.value() / n;
    CompensatedSum ss;
    for (const Record& r : ds.records()) {
      if (r.group == g) ss.add((r.score - mean) * (r.score - mean));
    }
    return std::make_tuple(n, mean, ss.value());
  };
  const auto [nb, mb, ssb] = moments(groups.b);
  const auto [nw, mw, ssw] = moments(groups.w);
  const double pooled = std::sqrt((ssb + ssw) / static_cast<double>(nb + nw - 2));
  if (pooled == 0.0) {
    if (mb == mw) return 0.0;
    throw DataError("cohens_d: zero pooled standard deviation");
  }
  return (mb - mw) / pooled;
}

double cohens_d(const Dataset& ds) { return cohens_d(ds, default_pair(ds)); }

double overlap_bound(const PenaltyPolicy& policy, const ScoreDistribution& f_b, const ScoreDistribution& f_w) {
  if (policy.kind != PolicyKind::minmax) throw std::invalid_argument("overlap_bound applies to minmax policies");
  policy.validate();
  return (policy.t_max - policy.t_min) * tv_distance(f_b, f_w);
}

ImpactReport delta(const Dataset& ds, const PenaltyPolicy& policy, int y1, int y2, const GroupPair& groups) {
  policy.validate();
  if ((y1 != 0 && y1 != 1) || (y2 != 0 && y2 != 1)) throw std::invalid_argument("outcomes must be 0 or 1");
  const Schema& s = ds.schema();
  if (policy.score_min != s.score_min || policy.score_max != s.score_max) {
    throw std::invalid_argument("policy score range does not match the dataset schema");
  }

  ImpactReport rep;
  rep.kind = policy.kind;
  rep.group_b = groups.b;
  rep.group_w = groups.w;
  rep.y1 = y1;
  rep.y2 = y2;

  // Mean penalty over records of the stratum.
  auto stratum = [&](const std::string& g, int y, std::int64_t& n, std::int64_t& high) {
    CompensatedSum sum;
    n = 0;
    high = 0;
    for (const Record& r : ds.records()) {
      if (r.group != g || r.outcome != y) continue;
      sum.add(apply_policy(policy, r.score));
      ++n;
      if (r.score > policy.s_hr) ++high;
    }
    if (n == 0) throw DataError("empty stratum: group '" + g + "' with outcome " + std::to_string(y));
    return sum.value() / static_cast<double>(n);
  };
  std::int64_t high_b = 0, high_w = 0;
  rep.mean_b = stratum(groups.b, y1, rep.n_b, high_b);
  rep.mean_w = stratum(groups.w, y2, rep.n_w, high_w);
  rep.delta_empirical = rep.mean_b - rep.mean_w;

  if (policy.kind == PolicyKind::minmax) {
    rep.high_risk_b = static_cast<double>(high_b) / rep.n_b;
    rep.high_risk_w = static_cast<double>(high_w) / rep.n_w;
    rep.delta_closed_form = (policy.t_max - policy.t_min) * (*rep.high_risk_b - *rep.high_risk_w);
  }
  rep.tv = tv_distance(score_distribution(ds, groups.b, y1), score_distribution(ds, groups.w, y2));
  rep.tv_bound = (policy.t_max - policy.t_min) * rep.tv;
  return rep;
}

ImpactReport delta(const Dataset& ds, const PenaltyPolicy& policy, int y1, int y2) {
  return delta(ds, policy, y1, y2, default_pair(ds));
}

// ---------------------------------------------------------------- Sentencing

std::map<std::string, std::string> SentencingConfig::default_degree_map() {
  return {{"M2", "2"}, {"M1", "3"}, {"F3", "5"}, {"F2", "7"}, {"F1", "8"}};
}

SentencingConfig SentencingConfig::from_config(const KeyValueConfig& cfg) {
  SentencingConfig sc;
  sc.charge_covariate = cfg.get("charge_covariate").value_or(sc.charge_covariate);
  sc.prior_record_score = cfg.get_int("prior_record_score", sc.prior_record_score);
  for (const auto& ogs : cfg.suffixes("range.")) {
    const auto parts = split_list(cfg.require("range." + ogs));
    const auto lo = parts.size() == 2 ? parse_double(parts[0]) : std::nullopt;
    const auto hi = parts.size() == 2 ? parse_double(parts[1]) : std::nullopt;
    if (!lo || !hi) throw ConfigError(cfg.source() + ": range." + ogs + " must be '<t_min>, <t_max>'");
    sc.ranges[ogs] = {*lo, *hi};
  }
  const auto degrees = cfg.suffixes("degree.");
  if (!degrees.empty()) {
    sc.degree_to_ogs.clear();
    for (const auto& d : degrees) sc.degree_to_ogs[d] = cfg.require("degree." + d);
  }
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.source() + ": " + e.what());
  }
  return sc;
}

SentencingConfig SentencingConfig::load(const std::filesystem::path& path) {
  return from_config(KeyValueConfig::load(path));
}

void SentencingConfig::validate() const {
  if (ranges.empty()) throw std::invalid_argument("sentencing config has no penalty ranges");
  for (const auto& [ogs, r] : ranges) {
    if (!(r.t_min >= 0.0 && r.t_min <= r.t_max)) {
      throw std::invalid_argument("range for OGS " + ogs + " needs 0 <= t_min <= t_max");
    }
  }
  for (const auto& [degree, ogs] : degree_to_ogs) {
    if (!ranges.count(ogs)) {
      throw std::invalid_argument("charge degree " + degree + " maps to OGS " + ogs + " without a range");
    }
  }
}

std::vector<std::string> SentencingConfig::ogs_order() const {
  std::vector<std::string> out;
  for (const auto& [ogs, r] : ranges) out.push_back(ogs);
  std::stable_sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
    const auto na = parse_double(a), nb = parse_double(b);
    if (na && nb) return *na < *nb;
    return static_cast<bool>(na) && !nb;
  });
  return out;
}

std::optional<WelchTest> welch_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) return std::nullopt;
  auto moments = [](std::span<const double> x) {
    CompensatedSum sum;
    for (double v : x) sum.add(v);
    const double mean = sum.value() / static_cast<double>(x.size());
    CompensatedSum ss;
    for (double v : x) ss.add((v - mean) * (v - mean));
    return std::make_pair(mean, ss.value() / static_cast<double>(x.size() - 1));
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double qa = va / na, qb = vb / nb;
  const double se2 = qa + qb;
  WelchTest w;
  if (se2 == 0.0) {
    // Both samples constant: any difference is exact.
    w.df = na + nb - 2.0;
    if (ma == mb) {
      w.t = 0.0;
      w.p_value = 1.0;
    } else {
      w.t = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      w.p_value = 0.0;
    }
    return w;
  }
  w.t = (ma - mb) / std::sqrt(se2);
  w.df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  const boost::math::students_t dist(w.df);
  w.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(w.t)));
  return w;
}

SentencingAnalysis sentencing_analysis(const Dataset& ds, const SentencingConfig& cfg, PolicyKind kind, int s_hr,
                                       const GroupPair& groups, double alpha) {
  cfg.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const Schema& s = ds.schema();
  const std::size_t charge = s.require_covariate(cfg.charge_covariate);

  SentencingAnalysis out;
  out.kind = kind;
  out.s_hr = s_hr;
  out.alpha = alpha;
  out.groups = groups;
  out.prior_record_score = cfg.prior_record_score;

  // penalties[ogs][group b=0/w=1][outcome], plus high-risk counts.
  struct Cell {
    std::vector<double> penalties;
    std::int64_t high = 0;
  };
  std::map<std::string, std::array<std::array<Cell, 2>, 2>> cells;
  for (const auto& ogs : cfg.ogs_order()) cells[ogs];

  for (const Record& r : ds.records()) {
    int gi;
    if (r.group == groups.b) {
      gi = 0;
    } else if (r.group == groups.w) {
      gi = 1;
    } else {
      continue;
    }
    const CovariateValue& v = r.covariates[charge];
    if (is_missing(v)) {
      ++out.excluded_missing;
      continue;
    }
    const std::string degree = to_string(v);
    const auto it = cfg.degree_to_ogs.find(degree);
    if (it == cfg.degree_to_ogs.end()) throw DataError("unmapped charge degree '" + degree + "'");
    const PenaltyRange& range = cfg.ranges.at(it->second);
    const PenaltyPolicy policy = kind == PolicyKind::minmax
                                     ? PenaltyPolicy::minmax(range.t_min, range.t_max, s_hr, s.score_min, s.score_max)
                                     : PenaltyPolicy::interpolation(range.t_min, range.t_max, s.score_min, s.score_max);
    Cell& cell = cells[it->second][gi][r.outcome];
    cell.penalties.push_back(apply_policy(policy, r.score));
    if (r.score > s_hr) ++cell.high;
  }

  auto summarize = [](const Cell& c) {
    StratumSummary sum;
    sum.n = static_cast<std::int64_t>(c.penalties.size());
    if (sum.n == 0) return sum;
    CompensatedSum total;
    for (double v : c.penalties) total.add(v);
    sum.mean = total.value() / static_cast<double>(sum.n);
    sum.high_risk_rate = static_cast<double>(c.high) / static_cast<double>(sum.n);
    if (sum.n >= 2) {
      CompensatedSum ss;
      for (double v : c.penalties) ss.add((v - *sum.mean) * (v - *sum.mean));
      sum.sd = std::sqrt(ss.value() / static_cast<double>(sum.n - 1));
    }
    return sum;
  };

  for (const auto& ogs : cfg.ogs_order()) {
    for (int y = 0; y <= 1; ++y) {
      const Cell& cb = cells[ogs][0][y];
      const Cell& cw = cells[ogs][1][y];
      SentencingRow row;
      row.ogs = ogs;
      row.outcome = y;
      row.range = cfg.ranges.at(ogs);
      row.b = summarize(cb);
      row.w = summarize(cw);
      if (row.b.mean && row.w.mean) {
        row.delta = *row.b.mean - *row.w.mean;
        if (kind == PolicyKind::minmax) {
          row.delta_closed_form = (row.range.t_max - row.range.t_min) * (*row.b.high_risk_rate - *row.w.high_risk_rate);
        }
      }
      row.welch = welch_test(cb.penalties, cw.penalties);
      row.significant = row.welch && row.welch->p_value < alpha;
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace fairaudit
