#pragma once

// Logistic regression of the "scored high-risk" indicator among
// non-recidivists, fitted by iteratively reweighted least squares.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fairaudit/config.hpp"
#include "fairaudit/dataset.hpp"

namespace fairaudit {

struct Predictor {
  std::string label;   // coefficient name prefix, e.g. "race" or "Age"
  std::string source;  // covariate name, or "@group" for the group label
  CovariateKind kind = CovariateKind::numeric;
  std::string reference;                            // categorical only
  std::map<std::string, std::string> level_labels;  // level -> display suffix
};

// Response y = 1 iff score > response_cutoff, fitted on records whose
// outcome equals subset_outcome (all records when unset).
//
// Config keys:
//   response_cutoff = 4
//   subset_outcome = 0
//   predictors = race, age, ...
//   predictor.<id>.source = @group | <covariate>
//   predictor.<id>.kind = categorical | numeric
//   predictor.<id>.reference = <level>
//   predictor.<id>.label = <display prefix>       (defaults to <id>)
//   predictor.<id>.level.<level> = <display suffix>
struct DesignSpec {
  int response_cutoff = 4;
  std::optional<int> subset_outcome = 0;
  std::vector<Predictor> predictors;

  static DesignSpec from_config(const KeyValueConfig& cfg);
  static DesignSpec load(const std::filesystem::path& path);
};

struct Design {
  std::vector<std::string> columns;  // "(Intercept)" first
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::size_t excluded_missing = 0;
};

Design build_design(const Dataset& ds, const DesignSpec& spec);

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  double p_value = 1.0;  // two-sided normal tail
};

enum class FitStatus { converged, max_iterations, separation };
std::string_view to_string(FitStatus s);

struct FitResult {
  std::vector<Coefficient> coefficients;
  FitStatus status = FitStatus::converged;
  int iterations = 0;
  double log_likelihood = 0.0;
  std::size_t n = 0;

  bool converged() const { return status == FitStatus::converged; }
  const Coefficient& coefficient(std::string_view name) const;
};

inline constexpr double kIrlsTolerance = 1e-10;
inline constexpr int kIrlsMaxIterations = 50;

// Throws std::invalid_argument when the design is not of full column rank.
FitResult fit_logistic(const Design& design, double tol = kIrlsTolerance, int max_iter = kIrlsMaxIterations);
FitResult fit_logistic(const std::vector<std::string>& columns, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       double tol = kIrlsTolerance, int max_iter = kIrlsMaxIterations);

double log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta);

double odds_ratio(const FitResult& fit, std::string_view name);

}  // namespace fairaudit
