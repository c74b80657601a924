#include "fairaudit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "fairaudit/error.hpp"
#include "fairaudit/fairness.hpp"
#include "fairaudit/format.hpp"

namespace fairaudit {

namespace {

constexpr double kPmfTolerance = 1e-12;

std::mt19937_64 cell_stream(std::uint64_t seed, std::size_t group, int cell) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(group), static_cast<std::uint32_t>(cell)};
  return std::mt19937_64(seq);
}

std::vector<double> parse_pmf(const KeyValueConfig& cfg, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(cfg.require(key))) {
    const auto v = parse_double(item);
    if (!v) throw ConfigError(cfg.source() + ": " + key + " has non-numeric entry '" + item + "'");
    out.push_back(*v);
  }
  return out;
}

std::string join_numbers(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + format_number(xs[i]);
  return out;
}

void check_integral(bool enabled, double quota, const std::string& what) {
  if (enabled && std::abs(quota - std::round(quota)) > 1e-9 * std::max(1.0, std::abs(quota))) {
    throw DataError("exact-count rounding infeasible: " + what + " needs " + format_number(quota) + " records");
  }
}

}  // namespace

void PopulationSpec::validate() const {
  if (score_min > score_max) throw std::invalid_argument("population spec: empty score support");
  if (groups.empty()) throw std::invalid_argument("population spec: no groups");
  const auto width = static_cast<std::size_t>(score_max - score_min + 1);
  std::set<std::string> labels;
  for (const auto& g : groups) {
    if (g.label.empty() || !labels.insert(g.label).second) {
      throw std::invalid_argument("population spec: empty or duplicate group label");
    }
    if (g.size < 1) throw std::invalid_argument("population spec: group '" + g.label + "' needs size >= 1");
    if (!(g.prevalence >= 0.0 && g.prevalence <= 1.0)) {
      throw std::invalid_argument("population spec: prevalence of '" + g.label + "' outside [0, 1]");
    }
    for (const auto* pmf : {&g.pmf_negative, &g.pmf_positive}) {
      if (pmf->size() != width) {
        throw std::invalid_argument("population spec: pmf of '" + g.label + "' has " + std::to_string(pmf->size()) +
                                    " entries, support has " + std::to_string(width));
      }
      double total = 0.0;
      for (double v : *pmf) {
        if (!(v >= 0.0)) throw std::invalid_argument("population spec: negative pmf entry for '" + g.label + "'");
        total += v;
      }
      if (std::abs(total - 1.0) > kPmfTolerance * static_cast<double>(width)) {
        throw std::invalid_argument("population spec: pmf of '" + g.label + "' sums to " + format_number(total));
      }
    }
  }
}

PopulationSpec PopulationSpec::from_config(const KeyValueConfig& cfg) {
  PopulationSpec spec;
  spec.score_min = cfg.get_int("score_min", spec.score_min);
  spec.score_max = cfg.get_int("score_max", spec.score_max);
  if (auto seed = cfg.get("seed")) {
    const auto v = parse_integer(*seed);
    if (!v || *v < 0) throw ConfigError(cfg.source() + ": seed must be a non-negative integer");
    spec.seed = static_cast<std::uint64_t>(*v);
  }
  const std::string mode = cfg.get("mode").value_or("exact");
  if (mode == "sampled") {
    spec.mode = GenerationMode::sampled;
  } else if (mode != "exact") {
    throw ConfigError(cfg.source() + ": mode must be exact or sampled");
  }
  for (const auto& label : split_list(cfg.require("groups"))) {
    const std::string key = "group." + label + ".";
    GroupSpec g;
    g.label = label;
    g.size = cfg.require_int(key + "size");
    g.prevalence = cfg.require_double(key + "prevalence");
    g.pmf_negative = parse_pmf(cfg, key + "pmf0");
    g.pmf_positive = parse_pmf(cfg, key + "pmf1");
    spec.groups.push_back(std::move(g));
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.source() + ": " + e.what());
  }
  return spec;
}

PopulationSpec PopulationSpec::load(const std::filesystem::path& path) {
  return from_config(KeyValueConfig::load(path));
}

KeyValueConfig PopulationSpec::to_config() const {
  KeyValueConfig cfg;
  cfg.set("score_min", std::to_string(score_min));
  cfg.set("score_max", std::to_string(score_max));
  cfg.set("seed", std::to_string(seed));
  cfg.set("mode", mode == GenerationMode::exact ? "exact" : "sampled");
  std::string labels;
  for (const auto& g : groups) {
    labels += (labels.empty() ? "" : ", ") + g.label;
    const std::string key = "group." + g.label + ".";
    cfg.set(key + "size", std::to_string(g.size));
    cfg.set(key + "prevalence", format_number(g.prevalence));
    cfg.set(key + "pmf0", join_numbers(g.pmf_negative));
    cfg.set(key + "pmf1", join_numbers(g.pmf_positive));
  }
  cfg.set("groups", labels);
  return cfg;
}

std::vector<std::int64_t> largest_remainder(std::int64_t total, std::span<const double> weights) {
  if (total < 0) throw std::invalid_argument("largest_remainder: negative total");
  if (weights.empty()) throw std::invalid_argument("largest_remainder: no weights");
  std::vector<std::int64_t> counts(weights.size(), 0);
  std::vector<double> remainder(weights.size(), 0.0);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("largest_remainder: negative weight");
    const double quota = static_cast<double>(total) * weights[i];
    counts[i] = static_cast<std::int64_t>(std::floor(quota));
    remainder[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % order.size()) {
    ++counts[order[i]];
    ++assigned;
  }
  // Weights summing slightly above 1 can overshoot by a unit.
  for (std::size_t i = order.size(); assigned > total && i-- > 0;) {
    if (counts[order[i]] > 0) {
      --counts[order[i]];
      --assigned;
    }
  }
  return counts;
}

Dataset generate(const PopulationSpec& spec) {
  spec.validate();
  Schema schema;
  schema.score_min = spec.score_min;
  schema.score_max = spec.score_max;
  for (const auto& g : spec.groups) schema.groups.push_back(g.label);

  std::vector<Record> records;
  for (std::size_t gi = 0; gi < spec.groups.size(); ++gi) {
    const GroupSpec& g = spec.groups[gi];
    if (spec.mode == GenerationMode::exact) {
      check_integral(spec.require_integral, static_cast<double>(g.size) * g.prevalence, g.label + " positives");
      const double split[] = {1.0 - g.prevalence, g.prevalence};
      const auto by_outcome = largest_remainder(g.size, split);
      for (int y = 0; y <= 1; ++y) {
        const auto& pmf = y == 1 ? g.pmf_positive : g.pmf_negative;
        for (std::size_t i = 0; i < pmf.size(); ++i) {
          check_integral(spec.require_integral, static_cast<double>(by_outcome[y]) * pmf[i],
                         g.label + " outcome " + std::to_string(y) + " score " + std::to_string(spec.score_min + i));
        }
        const auto counts = largest_remainder(by_outcome[y], pmf);
        for (std::size_t i = 0; i < counts.size(); ++i) {
          for (std::int64_t k = 0; k < counts[i]; ++k) {
            records.push_back({g.label, spec.score_min + static_cast<int>(i), y, {}});
          }
        }
      }
    } else {
      auto outcome_rng = cell_stream(spec.seed, gi, 2);
      std::binomial_distribution<std::int64_t> positives(g.size, g.prevalence);
      const std::int64_t n_pos = positives(outcome_rng);
      for (int y = 0; y <= 1; ++y) {
        const auto& pmf = y == 1 ? g.pmf_positive : g.pmf_negative;
        auto rng = cell_stream(spec.seed, gi, y);
        std::discrete_distribution<int> score(pmf.begin(), pmf.end());
        const std::int64_t n = y == 1 ? n_pos : g.size - n_pos;
        for (std::int64_t k = 0; k < n; ++k) records.push_back({g.label, spec.score_min + score(rng), y, {}});
      }
    }
  }
  Provenance p;
  p.source = std::string("synthetic (") + (spec.mode == GenerationMode::exact ? "exact" : "sampled") +
             ", seed " + std::to_string(spec.seed) + ")";
  return Dataset(std::move(schema), std::move(records), std::move(p));
}

// ---------------------------------------------------------------- Constructions

namespace {

// Spreads `total` units over scores [lo, hi] with linear weights rising
// (ascending) or falling towards hi.
void spread(std::vector<double>& counts, int score_min, int lo, int hi, std::int64_t total, bool ascending) {
  if (total == 0) return;
  std::vector<double> w;
  for (int s = lo; s <= hi; ++s) w.push_back(ascending ? s - lo + 1.0 : hi - s + 1.0);
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= sum;
  const auto alloc = largest_remainder(total, w);
  for (int s = lo; s <= hi; ++s) counts[s - score_min] += static_cast<double>(alloc[s - lo]);
}

std::vector<double> normalized(std::vector<double> counts, std::int64_t total, const std::vector<double>& fallback) {
  if (total == 0) return fallback;
  for (double& v : counts) v /= static_cast<double>(total);
  return counts;
}

}  // namespace

ParityInstrument construct_parity_instrument(double p_b, double p_w, int s_hr, double target_ppv, int score_min,
                                             int score_max, const ParityOptions& options) {
  if (score_min > s_hr || s_hr >= score_max) {
    throw std::domain_error("parity instrument: cutoff must leave scores on both sides");
  }
  if (!(target_ppv > 0.0 && target_ppv <= 1.0)) throw std::domain_error("parity instrument: PPV must lie in (0, 1]");
  if (options.ppv_denominator < 1) throw std::domain_error("parity instrument: ppv_denominator must be positive");

  // PPV as a reduced fraction tp : fp = a : c, shared by both groups.
  std::int64_t a = std::llround(target_ppv * options.ppv_denominator);
  std::int64_t c = options.ppv_denominator - a;
  if (a == 0) throw std::domain_error("parity instrument: PPV too small for the rounding denominator");
  const std::int64_t g = std::gcd(a, c);
  a /= g;
  c /= g;

  ParityInstrument out;
  out.s_hr = s_hr;
  out.ppv = static_cast<double>(a) / static_cast<double>(a + c);
  out.spec.score_min = score_min;
  out.spec.score_max = score_max;
  out.spec.seed = options.seed;
  out.spec.mode = GenerationMode::exact;

  const auto width = static_cast<std::size_t>(score_max - score_min + 1);
  std::vector<double> uniform(width, 1.0 / static_cast<double>(width));

  struct Side {
    const std::string& label;
    double p;
    double fnr;
    std::int64_t size;
    ConfusionMatrix& matrix;
    double& prevalence;
    double& realized_fnr;
  };
  for (const Side side : {Side{options.label_b, p_b, options.fnr_b, options.size_b, out.matrix_b, out.prevalence_b, out.fnr_b},
                          Side{options.label_w, p_w, options.fnr_w, options.size_w, out.matrix_w, out.prevalence_w, out.fnr_w}}) {
    if (!(side.p > 0.0 && side.p < 1.0)) throw std::domain_error("parity instrument: prevalence must lie in (0, 1)");
    if (!(side.fnr >= 0.0 && side.fnr < 1.0)) throw std::domain_error("parity instrument: FNR must lie in [0, 1)");
    if (implied_fpr(side.p, out.ppv, side.fnr) > 1.0) {
      throw std::domain_error("parity instrument: PPV " + format_number(out.ppv) + " is infeasible for prevalence " +
                              format_number(side.p) + " at FNR " + format_number(side.fnr));
    }
    const std::int64_t pos = std::llround(static_cast<double>(side.size) * side.p);
    const std::int64_t neg = side.size - pos;
    if (pos < 1 || neg < 1) throw std::domain_error("parity instrument: group '" + side.label + "' too small");

    std::int64_t k = std::max<std::int64_t>(1, std::llround((1.0 - side.fnr) * static_cast<double>(pos) / a));
    while (k > 0 && (k * a > pos || k * c > neg)) --k;
    if (k == 0) throw std::domain_error("parity instrument: group '" + side.label + "' too small for PPV fraction");

    ConfusionMatrix& m = side.matrix;
    m.tp = k * a;
    m.fp = k * c;
    m.fn = pos - m.tp;
    m.tn = neg - m.fp;
    side.prevalence = static_cast<double>(pos) / static_cast<double>(side.size);
    side.realized_fnr = static_cast<double>(m.fn) / static_cast<double>(pos);

    std::vector<double> pos_counts(width, 0.0), neg_counts(width, 0.0);
    spread(pos_counts, score_min, score_min, s_hr, m.fn, true);
    spread(pos_counts, score_min, s_hr + 1, score_max, m.tp, true);
    spread(neg_counts, score_min, score_min, s_hr, m.tn, false);
    spread(neg_counts, score_min, s_hr + 1, score_max, m.fp, false);

    GroupSpec gs;
    gs.label = side.label;
    gs.size = side.size;
    gs.prevalence = side.prevalence;
    gs.pmf_positive = normalized(std::move(pos_counts), pos, uniform);
    gs.pmf_negative = normalized(std::move(neg_counts), neg, uniform);
    out.spec.groups.push_back(std::move(gs));
  }
  return out;
}

PopulationSpec construct_calibrated_instrument(std::span<const double> rates, const std::vector<CalibratedGroup>& groups,
                                               int score_min, int score_max, std::uint64_t seed) {
  const auto width = static_cast<std::size_t>(score_max - score_min + 1);
  if (score_min > score_max || rates.size() != width) {
    throw std::invalid_argument("calibrated instrument: rates must cover the score support");
  }
  for (double r : rates) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("calibrated instrument: rates must lie in [0, 1]");
  }
  PopulationSpec spec;
  spec.score_min = score_min;
  spec.score_max = score_max;
  spec.seed = seed;
  spec.mode = GenerationMode::exact;
  for (const auto& cg : groups) {
    if (cg.score_pmf.size() != width) throw std::invalid_argument("calibrated instrument: pmf size mismatch");
    GroupSpec g;
    g.label = cg.label;
    g.size = cg.size;
    double p = 0.0;
    for (std::size_t i = 0; i < width; ++i) p += cg.score_pmf[i] * rates[i];
    g.prevalence = p;
    g.pmf_positive.resize(width);
    g.pmf_negative.resize(width);
    for (std::size_t i = 0; i < width; ++i) {
      g.pmf_positive[i] = p > 0.0 ? cg.score_pmf[i] * rates[i] / p : cg.score_pmf[i];
      g.pmf_negative[i] = p < 1.0 ? cg.score_pmf[i] * (1.0 - rates[i]) / (1.0 - p) : cg.score_pmf[i];
    }
    spec.groups.push_back(std::move(g));
  }
  spec.validate();
  return spec;
}

}  // namespace fairaudit
