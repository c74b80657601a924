#pragma once

// Canonical record collection shared by every analysis: one row per
// individual with a group label, an integer risk score, a binary outcome and
// optional named covariates.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fairaudit/config.hpp"

namespace fairaudit {

enum class CovariateKind { categorical, numeric };

struct CovariateSpec {
  std::string name;    // canonical name used by filters and models
  std::string column;  // source column in the CSV
  CovariateKind kind = CovariateKind::categorical;

  bool operator==(const CovariateSpec&) const = default;
};

// std::monostate marks an explicitly missing value.
using CovariateValue = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const CovariateValue& v) { return std::holds_alternative<std::monostate>(v); }
std::string to_string(const CovariateValue& v);

struct Schema {
  std::string group_column = "group";
  std::string score_column = "score";
  std::string outcome_column = "outcome";
  int score_min = 1;
  int score_max = 10;
  // Declared group labels, in analysis order. When non-empty at load time it
  // doubles as a whitelist: rows with other labels are dropped and counted.
  std::vector<std::string> groups;
  std::vector<CovariateSpec> covariates;
  std::vector<std::string> missing_tokens = {"", "NA"};

  std::optional<std::size_t> covariate_index(std::string_view name) const;
  std::size_t require_covariate(std::string_view name) const;

  // Keys: group, score, outcome, score_min, score_max, groups, missing,
  // covariate.<name> = <column>, kind.<name> = numeric|categorical.
  static Schema from_config(const KeyValueConfig& cfg);
  static Schema load(const std::filesystem::path& path);
  KeyValueConfig to_config() const;

  bool operator==(const Schema&) const = default;
};

struct Record {
  std::string group;
  int score = 0;
  int outcome = 0;
  std::vector<CovariateValue> covariates;  // aligned with Schema::covariates

  bool operator==(const Record&) const = default;
};

struct Provenance {
  std::string source;
  std::vector<std::string> steps;        // applied filters, in order
  std::vector<std::string> diagnostics;  // rejected rows, exclusion counts
};

// Immutable after construction.
class Dataset {
 public:
  Dataset(Schema schema, std::vector<Record> records, Provenance provenance = {});

  const Schema& schema() const { return schema_; }
  std::span<const Record> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const Provenance& provenance() const { return provenance_; }

  // Declared groups that have at least one record, in declared order.
  std::vector<std::string> groups() const;
  std::size_t count(std::string_view group) const;
  bool has_group(std::string_view group) const;

  const CovariateValue& covariate(const Record& r, std::string_view name) const;

  // Same schema, new record subset, one more provenance step.
  Dataset derive(std::vector<Record> records, std::string step,
                 std::vector<std::string> diagnostics = {}) const;
  Dataset derive(Schema schema, std::vector<Record> records, std::string step,
                 std::vector<std::string> diagnostics = {}) const;

  // Semantic equality: schema and records, ignoring provenance.
  bool same_contents(const Dataset& other) const;

 private:
  Schema schema_;
  std::vector<Record> records_;
  Provenance provenance_;
};

// Ordered pair of groups for two-group comparisons. `b` plays the role of
// the first (reference "higher prevalence") group, `w` the second.
struct GroupPair {
  std::string b;
  std::string w;
};

// First two groups present in the data; DataError if fewer than two.
GroupPair default_pair(const Dataset& ds);

struct LoadOptions {
  // Reject the whole file when any row fails type checks. When false the
  // bad rows are skipped and listed in the provenance diagnostics.
  bool strict = true;
};

Dataset load_csv(const std::filesystem::path& path, const Schema& schema, LoadOptions options = {});
Dataset parse_csv(std::string_view text, const Schema& schema, std::string source = "<memory>",
                  LoadOptions options = {});

// Writes canonical columns group, score, outcome, then covariates by name.
// canonical_schema() describes that layout, so the output reloads losslessly.
void write_csv(std::ostream& out, const Dataset& ds);
Schema canonical_schema(const Schema& schema);

// ProPublica's two-year cohort filters: |days_b_screening_arrest| <= 30,
// is_recid != -1, c_charge_degree != "O", score_text != "N/A", and race in
// {African-American, Caucasian}. Records with a missing value in any of
// these covariates are excluded and counted.
Dataset apply_propublica_filters(const Dataset& raw);
inline constexpr std::string_view kPropublicaGroups[] = {"African-American", "Caucasian"};

// Keeps only the listed groups and makes them the declared group order.
Dataset restrict_groups(const Dataset& ds, const std::vector<std::string>& groups);

// Conjunction of per-covariate clauses. A clause either lists admissible
// levels or gives an inclusive numeric range.
struct CovariateFilter {
  struct Clause {
    std::string covariate;
    std::vector<std::string> levels;
    std::optional<std::pair<double, double>> range;
  };
  std::vector<Clause> clauses;

  // "priors_count in [0,0]; c_charge_degree = M; sex in {Male,Female}"
  static CovariateFilter parse(std::string_view text);
  std::string describe() const;
};

Dataset filter(const Dataset& ds, const CovariateFilter& f);

}  // namespace fairaudit
