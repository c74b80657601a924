#pragma once

// Report assembly: JSON documents with sorted keys and CSV section tables.
// Every number here comes from an analysis module; this layer only
// arranges and formats.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairaudit/dataset.hpp"
#include "fairaudit/fairness.hpp"
#include "fairaudit/impact.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/regress.hpp"
#include "fairaudit/synth.hpp"
#include "fairaudit/tradeoff.hpp"

namespace fairaudit {

// nlohmann::json keeps object keys in a std::map, so dumps are canonical.
using Json = nlohmann::json;

std::string tool_version();

// A CSV section export.
struct TableExport {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_table(std::ostream& out, const TableExport& table);
// Two-space indented JSON followed by a newline.
void write_json(std::ostream& out, const Json& doc);

Json to_json(const Provenance& p);
Json to_json(const ConfusionMatrix& m);
Json to_json(const Interval& i);
Json to_json(const GroupMetrics& g);
Json to_json(const CalibrationCell& c);
Json to_json(const CriterionResult& r);
Json to_json(const ImpossibilityFinding& f);
Json to_json(const PenaltyPolicy& p);
Json to_json(const ImpactReport& r);
Json to_json(const SentencingAnalysis& a);
Json to_json(const FeasibleLine& l);
Json to_json(const FeasibleRegion& r);
Json to_json(const StrategyReport& r);
Json to_json(const FitResult& f);

// ---------------------------------------------------------------- Audit

struct AuditOptions {
  int cutoff = 4;  // threshold for the impossibility and strategy sections
  double ci_level = 0.95;
  double tolerance = kDefaultTolerance;
  std::optional<GroupPair> groups;  // defaults to the first two groups
  std::optional<std::uint64_t> seed;
};

// Single-group data yields a partial report with the comparison sections
// set to null.
struct AuditReport {
  Json document;
  std::vector<TableExport> tables;  // sweep, criteria, calibration
};

AuditReport build_audit(const Dataset& ds, const AuditOptions& options);

// ---------------------------------------------------------------- Impact

struct ImpactOptions {
  PenaltyPolicy policy;
  std::optional<SentencingConfig> sentencing;
  double alpha = 0.01;
  std::optional<GroupPair> groups;
};

struct ImpactSection {
  Json document;
  std::vector<TableExport> tables;  // delta, sentencing (when configured)
};

ImpactSection build_impact(const Dataset& ds, const ImpactOptions& options);

// ---------------------------------------------------------------- Region

struct RegionSample {
  double delta = 0.0;
  double fnr = 0.0;
  double fpr_lower = 0.0;
  double fpr_upper = 0.0;
};

// resolution + 1 evenly spaced FNR values over [0, 1] per band.
std::vector<RegionSample> sample_region(const FeasibleRegion& region, int resolution);

struct RegionOptions {
  double prevalence = 0.5;
  double ppv = 0.5;
  std::vector<double> deltas = {0.05, 0.1, 0.125};
  int resolution = 100;
  // Observed point and retuning strategies, when derived from data.
  std::optional<StrategyReport> strategies;
};

struct RegionSection {
  Json document;
  std::vector<TableExport> tables;  // samples
};

RegionSection build_region(const RegionOptions& options);

// ---------------------------------------------------------------- Regress

struct RegressSection {
  Json document;
  std::vector<TableExport> tables;  // coefficients
};

// One fit per named design.
RegressSection build_regress(const Dataset& ds, const std::vector<std::pair<std::string, DesignSpec>>& models);

// ---------------------------------------------------------------- Synth

Json synth_summary(const PopulationSpec& spec, const Dataset& generated);

}  // namespace fairaudit
