// fairaudit: group fairness audits of risk scores from the command line.
//
// Exit codes: 0 success, 2 data error, 3 configuration or usage error,
// 4 internal error.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairaudit/config.hpp"
#include "fairaudit/dataset.hpp"
#include "fairaudit/error.hpp"
#include "fairaudit/impact.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/regress.hpp"
#include "fairaudit/report.hpp"
#include "fairaudit/synth.hpp"
#include "fairaudit/tradeoff.hpp"

namespace fs = std::filesystem;
using namespace fairaudit;

namespace {

constexpr int kExitData = 2;
constexpr int kExitConfig = 3;
constexpr int kExitInternal = 4;

struct InputFlags {
  std::string input;
  std::string schema;
  std::string filter;
  std::string groups;
  bool propublica = false;
  bool lenient = false;
};

struct OutputFlags {
  std::string out;
  std::string format = "json";
  std::string csv_dir;
};

void add_input_flags(CLI::App* cmd, InputFlags& f) {
  cmd->add_option("--input", f.input, "CSV file with one row per individual")->required();
  cmd->add_option("--schema", f.schema, "schema config (default: group,score,outcome columns, scores 1-10)");
  cmd->add_option("--filter", f.filter, "covariate filter, e.g. \"c_charge_degree = M; age in [18,25]\"");
  cmd->add_option("--groups", f.groups, "comparison pair \"b,w\" (default: first two declared groups)");
  cmd->add_flag("--propublica-filters", f.propublica, "apply the ProPublica two-year cohort filters");
  cmd->add_flag("--lenient", f.lenient, "skip malformed rows instead of rejecting the file");
}

void add_output_flags(CLI::App* cmd, OutputFlags& f) {
  cmd->add_option("--out", f.out, "output file (default: stdout)");
  cmd->add_option("--format", f.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--csv-dir", f.csv_dir, "also write every section table as <dir>/<section>.csv");
}

Dataset load_input(const InputFlags& f) {
  const Schema schema = f.schema.empty() ? canonical_schema(Schema{}) : Schema::load(f.schema);
  Dataset ds = load_csv(f.input, schema, LoadOptions{.strict = !f.lenient});
  if (f.propublica) ds = apply_propublica_filters(ds);
  if (!f.filter.empty()) ds = filter(ds, CovariateFilter::parse(f.filter));
  return ds;
}

std::optional<GroupPair> parse_pair(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto parts = split_list(text);
  if (parts.size() != 2 || parts[0].empty() || parts[1].empty() || parts[0] == parts[1]) {
    throw ConfigError("--groups expects two distinct labels \"b,w\", got '" + text + "'");
  }
  return GroupPair{parts[0], parts[1]};
}

std::vector<double> parse_numbers(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    const auto v = parse_double(item);
    if (!v) throw ConfigError(flag + ": '" + item + "' is not a number");
    out.push_back(*v);
  }
  if (out.empty()) throw ConfigError(flag + ": empty list");
  return out;
}

// Writes to the --out file, or stdout when none was given.
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file " + path);
  write(out);
  if (!out) throw std::runtime_error("failed writing " + path);
}

void emit_report(const OutputFlags& f, const Json& doc, const std::vector<TableExport>& tables) {
  if (!f.csv_dir.empty()) {
    fs::create_directories(f.csv_dir);
    for (const auto& t : tables) emit((fs::path(f.csv_dir) / (t.name + ".csv")).string(), [&](std::ostream& o) { write_table(o, t); });
  }
  if (f.format == "csv") {
    if (tables.empty()) throw ConfigError("this report has no CSV table");
    emit(f.out, [&](std::ostream& o) { write_table(o, tables.front()); });
  } else {
    emit(f.out, [&](std::ostream& o) { write_json(o, doc); });
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairaudit: group fairness audit of risk assessment scores"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  // audit
  InputFlags audit_in;
  OutputFlags audit_out;
  int audit_cutoff = 4;
  double ci = 0.95;
  double tolerance = kDefaultTolerance;
  std::optional<std::uint64_t> audit_seed;
  auto* audit = app.add_subcommand("audit", "threshold sweep, fairness criteria and impossibility report");
  add_input_flags(audit, audit_in);
  add_output_flags(audit, audit_out);
  audit->add_option("--cutoff", audit_cutoff, "high-risk cutoff for the impossibility and strategy sections");
  audit->add_option("--ci", ci, "Wilson interval level")->check(CLI::Range(0.5, 0.9999));
  audit->add_option("--tolerance", tolerance, "absolute gap tolerance for every criterion")->check(CLI::Range(0.0, 1.0));
  audit->add_option("--seed", audit_seed, "recorded in the report");

  // impact
  InputFlags impact_in;
  OutputFlags impact_out;
  std::string policy_kind = "minmax";
  double tmin = 0.0, tmax = 1.0, alpha = 0.01;
  int impact_cutoff = 4;
  std::string sentencing_path;
  auto* impact = app.add_subcommand("impact", "disparate impact of a score-driven penalty policy");
  add_input_flags(impact, impact_in);
  add_output_flags(impact, impact_out);
  impact->add_option("--policy", policy_kind, "minmax or interpolation")->check(CLI::IsMember({"minmax", "interpolation"}));
  impact->add_option("--tmin", tmin, "penalty for the lowest risk");
  impact->add_option("--tmax", tmax, "penalty for the highest risk");
  impact->add_option("--cutoff", impact_cutoff, "high-risk cutoff (minmax)");
  impact->add_option("--sentencing-config", sentencing_path, "per-OGS penalty ranges for the stratified analysis");
  impact->add_option("--alpha", alpha, "significance level of the Welch tests")->check(CLI::Range(0.0, 1.0));

  // region
  OutputFlags region_out;
  std::optional<double> region_p, region_ppv;
  std::string delta_band = "0.05,0.1,0.125";
  int resolution = 100;
  InputFlags region_in;
  int region_cutoff = 4;
  auto* region = app.add_subcommand("region", "feasible (FNR, FPR) region at fixed prevalence and PPV");
  add_output_flags(region, region_out);
  region->add_option("--p", region_p, "prevalence of the group being retuned");
  region->add_option("--ppv", region_ppv, "target PPV");
  region->add_option("--delta-band", delta_band, "comma-separated PPV half-widths");
  region->add_option("--resolution", resolution, "FNR steps per band")->check(CLI::Range(1, 1000000));
  region->add_option("--input", region_in.input, "take p_b and PPV_w from this data instead");
  region->add_option("--schema", region_in.schema, "schema config for --input");
  region->add_option("--filter", region_in.filter, "covariate filter for --input");
  region->add_option("--groups", region_in.groups, "comparison pair \"b,w\"");
  region->add_flag("--propublica-filters", region_in.propublica, "apply the ProPublica cohort filters");
  region->add_option("--cutoff", region_cutoff, "high-risk cutoff for the observed rates");

  // regress
  InputFlags regress_in;
  OutputFlags regress_out;
  std::vector<std::string> model_paths;
  auto* regress = app.add_subcommand("regress", "logistic regression of high-risk classification");
  add_input_flags(regress, regress_in);
  add_output_flags(regress, regress_out);
  regress->add_option("--model", model_paths, "design config; repeat for several models")->required();

  // synth
  std::string spec_path, synth_out, schema_out, summary_out;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "generate a synthetic population as CSV");
  synth->add_option("--spec", spec_path, "population spec config")->required();
  synth->add_option("--seed", synth_seed, "override the spec's seed");
  synth->add_option("--out", synth_out, "CSV output (default: stdout)");
  synth->add_option("--schema-out", schema_out, "write the schema config that reloads the CSV");
  synth->add_option("--summary", summary_out, "write a JSON summary of the generated population");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*audit) {
      const Dataset ds = load_input(audit_in);
      AuditOptions opts;
      opts.cutoff = audit_cutoff;
      opts.ci_level = ci;
      opts.tolerance = tolerance;
      opts.groups = parse_pair(audit_in.groups);
      opts.seed = audit_seed;
      const auto rep = build_audit(ds, opts);
      emit_report(audit_out, rep.document, rep.tables);
    } else if (*impact) {
      const Dataset ds = load_input(impact_in);
      ImpactOptions opts;
      const Schema& s = ds.schema();
      opts.policy = parse_policy_kind(policy_kind) == PolicyKind::minmax
                        ? PenaltyPolicy::minmax(tmin, tmax, impact_cutoff, s.score_min, s.score_max)
                        : PenaltyPolicy::interpolation(tmin, tmax, s.score_min, s.score_max);
      if (!sentencing_path.empty()) opts.sentencing = SentencingConfig::load(sentencing_path);
      opts.alpha = alpha;
      opts.groups = parse_pair(impact_in.groups);
      const auto rep = build_impact(ds, opts);
      emit_report(impact_out, rep.document, rep.tables);
    } else if (*region) {
      RegionOptions opts;
      opts.deltas = parse_numbers(delta_band, "--delta-band");
      opts.resolution = resolution;
      if (!region_in.input.empty()) {
        if (region_p || region_ppv) throw ConfigError("--input and --p/--ppv are mutually exclusive");
        const Dataset ds = load_input(region_in);
        const GroupPair pair = parse_pair(region_in.groups).value_or(default_pair(ds));
        const auto b = group_metrics(ds, pair.b, region_cutoff);
        const auto w = group_metrics(ds, pair.w, region_cutoff);
        if (!w.ppv) throw DataError("PPV of group '" + pair.w + "' is undefined at cutoff " + std::to_string(region_cutoff));
        opts.prevalence = b.prevalence;
        opts.ppv = *w.ppv;
        opts.strategies = strategy_report(b, w);
      } else {
        if (!region_p || !region_ppv) throw ConfigError("region needs --p and --ppv, or --input");
        opts.prevalence = *region_p;
        opts.ppv = *region_ppv;
      }
      const auto rep = build_region(opts);
      emit_report(region_out, rep.document, rep.tables);
    } else if (*regress) {
      const Dataset ds = load_input(regress_in);
      std::vector<std::pair<std::string, DesignSpec>> models;
      for (const auto& p : model_paths) models.emplace_back(fs::path(p).stem().string(), DesignSpec::load(p));
      const auto rep = build_regress(ds, models);
      emit_report(regress_out, rep.document, rep.tables);
    } else if (*synth) {
      PopulationSpec spec = PopulationSpec::load(spec_path);
      if (synth_seed) spec.seed = *synth_seed;
      const Dataset ds = generate(spec);
      emit(synth_out, [&](std::ostream& o) { write_csv(o, ds); });
      if (!schema_out.empty()) {
        emit(schema_out, [&](std::ostream& o) { o << canonical_schema(ds.schema()).to_config().to_text(); });
      }
      if (!summary_out.empty()) emit(summary_out, [&](std::ostream& o) { write_json(o, synth_summary(spec, ds)); });
    }
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
