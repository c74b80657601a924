#include "fairaudit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>
#include <set>
#include <unordered_map>

#include "fairaudit/csv.hpp"
#include "fairaudit/error.hpp"
#include "fairaudit/format.hpp"

namespace fairaudit {

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::string to_string(const CovariateValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return format_number(*d);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return {};
}

namespace {

std::optional<double> numeric_value(const CovariateValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* s = std::get_if<std::string>(&v)) return parse_double(*s);
  return std::nullopt;
}

std::string kind_name(CovariateKind k) { return k == CovariateKind::numeric ? "numeric" : "categorical"; }

}  // namespace

// ---------------------------------------------------------------- Schema

std::optional<std::size_t> Schema::covariate_index(std::string_view name) const {
  for (std::size_t i = 0; i < covariates.size(); ++i) {
    if (covariates[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::require_covariate(std::string_view name) const {
  const auto idx = covariate_index(name);
  if (!idx) throw ConfigError("unknown covariate '" + std::string(name) + "'");
  return *idx;
}

Schema Schema::from_config(const KeyValueConfig& cfg) {
  Schema s;
  s.group_column = cfg.require("group");
  s.score_column = cfg.require("score");
  s.outcome_column = cfg.require("outcome");
  s.score_min = cfg.get_int("score_min", 1);
  s.score_max = cfg.get_int("score_max", 10);
  if (s.score_min > s.score_max) {
    throw ConfigError(cfg.source() + ": score_min exceeds score_max");
  }
  if (auto groups = cfg.get("groups")) {
    s.groups = split_list(*groups);
    std::set<std::string> seen;
    for (const auto& g : s.groups) {
      if (g.empty() || !seen.insert(g).second) {
        throw ConfigError(cfg.source() + ": empty or duplicate label in 'groups'");
      }
    }
  }
  if (auto missing = cfg.get("missing")) {
    s.missing_tokens = split_list(*missing);
    if (s.missing_tokens.empty()) s.missing_tokens.push_back("");
  }
  for (const auto& name : cfg.suffixes("covariate.")) {
    CovariateSpec c;
    c.name = name;
    c.column = cfg.require("covariate." + name);
    const std::string kind = cfg.get("kind." + name).value_or("categorical");
    if (kind == "numeric") {
      c.kind = CovariateKind::numeric;
    } else if (kind != "categorical") {
      throw ConfigError(cfg.source() + ": kind." + name + " must be numeric or categorical");
    }
    s.covariates.push_back(std::move(c));
  }
  for (const auto& name : cfg.suffixes("kind.")) {
    if (!s.covariate_index(name)) {
      throw ConfigError(cfg.source() + ": kind." + name + " without covariate." + name);
    }
  }
  return s;
}

Schema Schema::load(const std::filesystem::path& path) { return from_config(KeyValueConfig::load(path)); }

KeyValueConfig Schema::to_config() const {
  KeyValueConfig cfg;
  cfg.set("group", group_column);
  cfg.set("score", score_column);
  cfg.set("outcome", outcome_column);
  cfg.set("score_min", std::to_string(score_min));
  cfg.set("score_max", std::to_string(score_max));
  std::string joined;
  for (const auto& g : groups) joined += (joined.empty() ? "" : ", ") + g;
  if (!joined.empty()) cfg.set("groups", joined);
  std::string missing;
  for (std::size_t i = 0; i < missing_tokens.size(); ++i) missing += (i ? ", " : "") + missing_tokens[i];
  cfg.set("missing", missing);
  for (const auto& c : covariates) {
    cfg.set("covariate." + c.name, c.column);
    cfg.set("kind." + c.name, kind_name(c.kind));
  }
  return cfg;
}

// ---------------------------------------------------------------- Dataset

Dataset::Dataset(Schema schema, std::vector<Record> records, Provenance provenance)
    : schema_(std::move(schema)), records_(std::move(records)), provenance_(std::move(provenance)) {
  std::set<std::string_view> declared(schema_.groups.begin(), schema_.groups.end());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const Record& r = records_[i];
    const std::string where = "record " + std::to_string(i + 1);
    if (r.score < schema_.score_min || r.score > schema_.score_max) {
      throw DataError(where + ": score " + std::to_string(r.score) + " outside [" +
                      std::to_string(schema_.score_min) + ", " + std::to_string(schema_.score_max) + "]");
    }
    if (r.outcome != 0 && r.outcome != 1) throw DataError(where + ": outcome must be 0 or 1");
    if (!declared.count(r.group)) throw DataError(where + ": undeclared group '" + r.group + "'");
    if (r.covariates.size() != schema_.covariates.size()) {
      throw DataError(where + ": covariate count does not match schema");
    }
  }
}

std::vector<std::string> Dataset::groups() const {
  std::vector<std::string> out;
  for (const auto& g : schema_.groups) {
    if (has_group(g)) out.push_back(g);
  }
  return out;
}

std::size_t Dataset::count(std::string_view group) const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [&](const Record& r) { return r.group == group; }));
}

bool Dataset::has_group(std::string_view group) const {
  return std::any_of(records_.begin(), records_.end(), [&](const Record& r) { return r.group == group; });
}

const CovariateValue& Dataset::covariate(const Record& r, std::string_view name) const {
  return r.covariates.at(schema_.require_covariate(name));
}

Dataset Dataset::derive(std::vector<Record> records, std::string step, std::vector<std::string> diagnostics) const {
  return derive(schema_, std::move(records), std::move(step), std::move(diagnostics));
}

Dataset Dataset::derive(Schema schema, std::vector<Record> records, std::string step,
                        std::vector<std::string> diagnostics) const {
  Provenance p = provenance_;
  p.steps.push_back(std::move(step));
  for (auto& d : diagnostics) p.diagnostics.push_back(std::move(d));
  return Dataset(std::move(schema), std::move(records), std::move(p));
}

bool Dataset::same_contents(const Dataset& other) const {
  return schema_ == other.schema_ && records_ == other.records_;
}

GroupPair default_pair(const Dataset& ds) {
  const auto groups = ds.groups();
  if (groups.size() < 2) {
    throw DataError("between-group analysis needs two groups with records; found " + std::to_string(groups.size()));
  }
  return {groups[0], groups[1]};
}

// ---------------------------------------------------------------- Loading

Dataset parse_csv(std::string_view text, const Schema& schema, std::string source, LoadOptions options) {
  const csv::Table table = csv::parse(text);

  std::unordered_map<std::string, std::size_t> column_of;
  for (std::size_t i = 0; i < table.header.size(); ++i) column_of.try_emplace(table.header[i], i);
  auto column = [&](const std::string& name) {
    const auto it = column_of.find(name);
    if (it == column_of.end()) throw DataError(source + ": missing mapped column '" + name + "'");
    return it->second;
  };
  const std::size_t group_col = column(schema.group_column);
  const std::size_t score_col = column(schema.score_column);
  const std::size_t outcome_col = column(schema.outcome_column);
  std::vector<std::size_t> cov_cols;
  for (const auto& c : schema.covariates) cov_cols.push_back(column(c.column));

  const std::set<std::string> missing(schema.missing_tokens.begin(), schema.missing_tokens.end());
  const std::set<std::string> whitelist(schema.groups.begin(), schema.groups.end());

  std::vector<Record> records;
  records.reserve(table.rows.size());
  std::vector<std::string> rejected;
  std::set<std::string> seen_groups;
  std::size_t dropped_groups = 0;

  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const csv::Row& row = table.rows[i];
    const std::string where = "row " + std::to_string(i + 1) + " (line " + std::to_string(table.lines[i]) + ")";
    if (row.size() != table.header.size()) {
      rejected.push_back(where + ": expected " + std::to_string(table.header.size()) + " fields, found " +
                         std::to_string(row.size()));
      continue;
    }
    Record r;
    r.group = row[group_col];
    if (r.group.empty()) {
      rejected.push_back(where + ": empty group label");
      continue;
    }
    if (!whitelist.empty() && !whitelist.count(r.group)) {
      ++dropped_groups;
      continue;
    }
    const auto score = parse_integer(row[score_col]);
    if (!score) {
      rejected.push_back(where + ": score '" + row[score_col] + "' is not an integer");
      continue;
    }
    if (*score < schema.score_min || *score > schema.score_max) {
      rejected.push_back(where + ": score " + std::to_string(*score) + " outside [" +
                         std::to_string(schema.score_min) + ", " + std::to_string(schema.score_max) + "]");
      continue;
    }
    r.score = static_cast<int>(*score);
    const auto outcome = parse_integer(row[outcome_col]);
    if (!outcome || (*outcome != 0 && *outcome != 1)) {
      rejected.push_back(where + ": outcome '" + row[outcome_col] + "' is not 0 or 1");
      continue;
    }
    r.outcome = static_cast<int>(*outcome);

    bool ok = true;
    r.covariates.reserve(cov_cols.size());
    for (std::size_t c = 0; c < cov_cols.size(); ++c) {
      const std::string& raw = row[cov_cols[c]];
      if (missing.count(raw)) {
        r.covariates.emplace_back(std::monostate{});
      } else if (schema.covariates[c].kind == CovariateKind::numeric) {
        const auto v = parse_double(raw);
        if (!v || !std::isfinite(*v)) {
          rejected.push_back(where + ": covariate " + schema.covariates[c].name + " value '" + raw +
                             "' is not numeric");
          ok = false;
          break;
        }
        r.covariates.emplace_back(*v);
      } else {
        r.covariates.emplace_back(raw);
      }
    }
    if (!ok) continue;
    seen_groups.insert(r.group);
    records.push_back(std::move(r));
  }

  if (!rejected.empty() && options.strict) {
    std::string msg = source + ": " + std::to_string(rejected.size()) + " row(s) failed type checks";
    for (std::size_t i = 0; i < std::min<std::size_t>(rejected.size(), 10); ++i) msg += "\n  " + rejected[i];
    if (rejected.size() > 10) msg += "\n  ...";
    throw DataError(msg);
  }
  if (records.empty()) throw DataError(source + ": empty result (no valid records)");

  Schema out_schema = schema;
  if (out_schema.groups.empty()) out_schema.groups.assign(seen_groups.begin(), seen_groups.end());

  Provenance p;
  p.source = std::move(source);
  p.diagnostics = std::move(rejected);
  if (dropped_groups) {
    p.steps.push_back("group whitelist: dropped " + std::to_string(dropped_groups) + " rows");
  }
  return Dataset(std::move(out_schema), std::move(records), std::move(p));
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema, LoadOptions options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_csv(text, schema, path.string(), options);
}

Schema canonical_schema(const Schema& schema) {
  Schema s = schema;
  s.group_column = "group";
  s.score_column = "score";
  s.outcome_column = "outcome";
  for (auto& c : s.covariates) c.column = c.name;
  // Missing values are written as empty fields; keep "" first so an empty
  // string covariate cannot be confused with a real level.
  s.missing_tokens = {""};
  return s;
}

void write_csv(std::ostream& out, const Dataset& ds) {
  csv::Row header = {"group", "score", "outcome"};
  for (const auto& c : ds.schema().covariates) header.push_back(c.name);
  csv::write_row(out, header);
  csv::Row row;
  for (const Record& r : ds.records()) {
    row.clear();
    row.push_back(r.group);
    row.push_back(std::to_string(r.score));
    row.push_back(std::to_string(r.outcome));
    for (const auto& v : r.covariates) row.push_back(to_string(v));
    csv::write_row(out, row);
  }
}

// ---------------------------------------------------------------- Filters

Dataset apply_propublica_filters(const Dataset& raw) {
  const Schema& s = raw.schema();
  const std::size_t gap = s.require_covariate("days_b_screening_arrest");
  const std::size_t is_recid = s.require_covariate("is_recid");
  const std::size_t degree = s.require_covariate("c_charge_degree");
  const std::size_t text = s.require_covariate("score_text");

  std::vector<Record> kept;
  std::size_t missing = 0;
  for (const Record& r : raw.records()) {
    if (r.group != kPropublicaGroups[0] && r.group != kPropublicaGroups[1]) continue;
    const auto& cv = r.covariates;
    if (is_missing(cv[gap]) || is_missing(cv[is_recid]) || is_missing(cv[degree]) || is_missing(cv[text])) {
      ++missing;
      continue;
    }
    const auto days = numeric_value(cv[gap]);
    const auto recid = numeric_value(cv[is_recid]);
    if (!days || !recid) throw DataError("propublica filters: non-numeric day gap or is_recid value");
    if (std::abs(*days) > 30.0) continue;
    if (*recid == -1.0) continue;
    if (to_string(cv[degree]) == "O") continue;
    if (to_string(cv[text]) == "N/A") continue;
    kept.push_back(r);
  }

  Schema out = s;
  out.groups.assign(std::begin(kPropublicaGroups), std::end(kPropublicaGroups));
  std::vector<std::string> diag;
  if (missing) diag.push_back("propublica filters: excluded " + std::to_string(missing) + " records with missing values");
  return raw.derive(std::move(out), std::move(kept),
                    "propublica filters: |days_b_screening_arrest| <= 30, is_recid != -1, "
                    "c_charge_degree != O, score_text != N/A, race in {African-American, Caucasian}",
                    std::move(diag));
}

Dataset restrict_groups(const Dataset& ds, const std::vector<std::string>& groups) {
  const std::set<std::string> keep(groups.begin(), groups.end());
  if (keep.size() != groups.size()) throw ConfigError("restrict_groups: duplicate group label");
  std::vector<Record> kept;
  for (const Record& r : ds.records()) {
    if (keep.count(r.group)) kept.push_back(r);
  }
  Schema out = ds.schema();
  out.groups = groups;
  std::string step = "restrict groups to {";
  for (std::size_t i = 0; i < groups.size(); ++i) step += (i ? ", " : "") + groups[i];
  return ds.derive(std::move(out), std::move(kept), step + "}");
}

CovariateFilter CovariateFilter::parse(std::string_view text) {
  CovariateFilter f;
  for (const auto& part : split_list(text, ';')) {
    if (part.empty()) continue;
    Clause c;
    if (const auto eq = part.find('='); eq != std::string::npos) {
      c.covariate = trim(part.substr(0, eq));
      c.levels.push_back(trim(part.substr(eq + 1)));
    } else if (const auto in = part.find(" in "); in != std::string::npos) {
      c.covariate = trim(part.substr(0, in));
      const std::string rhs = trim(part.substr(in + 4));
      if (rhs.size() < 2) throw ConfigError("filter clause '" + part + "': empty set or range");
      const std::string inner = rhs.substr(1, rhs.size() - 2);
      if (rhs.front() == '[' && rhs.back() == ']') {
        const auto bounds = split_list(inner);
        const auto lo = bounds.size() == 2 ? parse_double(bounds[0]) : std::nullopt;
        const auto hi = bounds.size() == 2 ? parse_double(bounds[1]) : std::nullopt;
        if (!lo || !hi || *lo > *hi) throw ConfigError("filter clause '" + part + "': bad range");
        c.range = std::make_pair(*lo, *hi);
      } else if (rhs.front() == '{' && rhs.back() == '}') {
        c.levels = split_list(inner);
      } else {
        throw ConfigError("filter clause '" + part + "': expected [lo,hi] or {a,b}");
      }
    } else {
      throw ConfigError("filter clause '" + part + "': expected 'name = value' or 'name in ...'");
    }
    if (c.covariate.empty()) throw ConfigError("filter clause '" + part + "': empty covariate name");
    f.clauses.push_back(std::move(c));
  }
  return f;
}

std::string CovariateFilter::describe() const {
  if (clauses.empty()) return "filter: (all)";
  std::string out = "filter: ";
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    const Clause& c = clauses[i];
    if (i) out += "; ";
    out += c.covariate;
    if (c.range) {
      out += " in [" + format_number(c.range->first) + "," + format_number(c.range->second) + "]";
    } else {
      out += " in {";
      for (std::size_t j = 0; j < c.levels.size(); ++j) out += (j ? "," : "") + c.levels[j];
      out += "}";
    }
  }
  return out;
}

Dataset filter(const Dataset& ds, const CovariateFilter& f) {
  const Schema& s = ds.schema();
  struct Bound {
    std::size_t index;
    CovariateKind kind;
    const CovariateFilter::Clause* clause;
    std::vector<double> numeric_levels;
  };
  std::vector<Bound> bound;
  for (const auto& c : f.clauses) {
    Bound b{s.require_covariate(c.covariate), CovariateKind::categorical, &c, {}};
    b.kind = s.covariates[b.index].kind;
    if (c.range && b.kind != CovariateKind::numeric) {
      throw ConfigError("filter: range on categorical covariate '" + c.covariate + "'");
    }
    if (b.kind == CovariateKind::numeric) {
      for (const auto& level : c.levels) {
        const auto v = parse_double(level);
        if (!v) throw ConfigError("filter: '" + level + "' is not numeric for covariate '" + c.covariate + "'");
        b.numeric_levels.push_back(*v);
      }
    }
    bound.push_back(std::move(b));
  }

  std::vector<Record> kept;
  std::size_t missing = 0;
  for (const Record& r : ds.records()) {
    bool pass = true;
    bool saw_missing = false;
    for (const Bound& b : bound) {
      const CovariateValue& v = r.covariates[b.index];
      if (is_missing(v)) {
        saw_missing = true;
        pass = false;
        break;
      }
      if (b.kind == CovariateKind::numeric) {
        const double x = std::get<double>(v);
        if (b.clause->range) {
          pass = x >= b.clause->range->first && x <= b.clause->range->second;
        } else {
          pass = std::find(b.numeric_levels.begin(), b.numeric_levels.end(), x) != b.numeric_levels.end();
        }
      } else {
        const auto& levels = b.clause->levels;
        pass = std::find(levels.begin(), levels.end(), std::get<std::string>(v)) != levels.end();
      }
      if (!pass) break;
    }
    if (saw_missing) ++missing;
    if (pass) kept.push_back(r);
  }
  std::vector<std::string> diag;
  if (missing) diag.push_back(f.describe() + ": excluded " + std::to_string(missing) + " records with missing values");
  return ds.derive(std::move(kept), f.describe(), std::move(diag));
}

}  // namespace fairaudit
