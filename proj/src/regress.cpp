#include "fairaudit/regress.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "fairaudit/error.hpp"

namespace fairaudit {

namespace {

constexpr std::string_view kGroupSource = "@group";

// log(1 + exp(eta)) without overflow.
double softplus(double eta) { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

}  // namespace

std::string_view to_string(FitStatus s) {
  switch (s) {
    case FitStatus::converged:
      return "converged";
    case FitStatus::max_iterations:
      return "max_iterations";
    case FitStatus::separation:
      return "separation";
  }
  return "unknown";
}

DesignSpec DesignSpec::from_config(const KeyValueConfig& cfg) {
  DesignSpec spec;
  spec.response_cutoff = cfg.get_int("response_cutoff", spec.response_cutoff);
  if (auto subset = cfg.get("subset_outcome")) {
    if (*subset == "all") {
      spec.subset_outcome.reset();
    } else {
      spec.subset_outcome = cfg.require_int("subset_outcome");
      if (*spec.subset_outcome != 0 && *spec.subset_outcome != 1) {
        throw ConfigError(cfg.source() + ": subset_outcome must be 0, 1 or all");
      }
    }
  }
  std::set<std::string> seen;
  for (const auto& id : split_list(cfg.require("predictors"))) {
    if (id.empty() || !seen.insert(id).second) throw ConfigError(cfg.source() + ": empty or duplicate predictor id");
    const std::string key = "predictor." + id + ".";
    Predictor p;
    p.source = cfg.require(key + "source");
    const std::string kind = cfg.get(key + "kind").value_or(p.source == kGroupSource ? "categorical" : "numeric");
    if (kind == "categorical") {
      p.kind = CovariateKind::categorical;
      p.reference = cfg.require(key + "reference");
    } else if (kind == "numeric") {
      p.kind = CovariateKind::numeric;
    } else {
      throw ConfigError(cfg.source() + ": " + key + "kind must be categorical or numeric");
    }
    p.label = cfg.get(key + "label").value_or(id);
    for (const auto& level : cfg.suffixes(key + "level.")) p.level_labels[level] = cfg.require(key + "level." + level);
    spec.predictors.push_back(std::move(p));
  }
  return spec;
}

DesignSpec DesignSpec::load(const std::filesystem::path& path) { return from_config(KeyValueConfig::load(path)); }

Design build_design(const Dataset& ds, const DesignSpec& spec) {
  const Schema& schema = ds.schema();
  struct Source {
    std::optional<std::size_t> covariate;  // empty for the group label
    const Predictor* predictor;
  };
  std::vector<Source> sources;
  std::set<std::string> seen;
  for (const auto& p : spec.predictors) {
    if (!seen.insert(p.source).second) throw ConfigError("predictor source '" + p.source + "' used twice");
    Source s{std::nullopt, &p};
    if (p.source != kGroupSource) {
      s.covariate = schema.require_covariate(p.source);
      const CovariateKind declared = schema.covariates[*s.covariate].kind;
      if (p.kind == CovariateKind::numeric && declared != CovariateKind::numeric) {
        throw ConfigError("predictor '" + p.label + "' is numeric but covariate '" + p.source + "' is categorical");
      }
    } else if (p.kind != CovariateKind::categorical) {
      throw ConfigError("the group label can only enter as a categorical predictor");
    }
    sources.push_back(s);
  }

  auto value_of = [&](const Record& r, const Source& s) -> CovariateValue {
    if (!s.covariate) return r.group;
    return r.covariates[*s.covariate];
  };

  // Rows: subset by outcome, listwise deletion of missing predictor values.
  std::vector<const Record*> rows;
  std::size_t excluded = 0;
  for (const Record& r : ds.records()) {
    if (spec.subset_outcome && r.outcome != *spec.subset_outcome) continue;
    const bool complete =
        std::none_of(sources.begin(), sources.end(), [&](const Source& s) { return is_missing(value_of(r, s)); });
    if (complete) {
      rows.push_back(&r);
    } else {
      ++excluded;
    }
  }
  if (rows.empty()) throw DataError("regression subset is empty");

  // Columns: intercept, then per predictor either the raw value or one
  // indicator per non-reference level (levels in sorted order).
  Design d;
  d.excluded_missing = excluded;
  d.columns.push_back("(Intercept)");
  std::vector<std::vector<std::string>> indicator_levels(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const Predictor& p = *sources[i].predictor;
    if (p.kind == CovariateKind::numeric) {
      d.columns.push_back(p.label);
      continue;
    }
    std::set<std::string> levels;
    for (const Record* r : rows) levels.insert(to_string(value_of(*r, sources[i])));
    if (!levels.count(p.reference)) {
      throw ConfigError("reference level '" + p.reference + "' of predictor '" + p.label + "' not present in data");
    }
    if (levels.size() < 2) {
      throw DataError("predictor '" + p.label + "' has a single level: design is rank deficient");
    }
    for (const auto& level : levels) {
      if (level == p.reference) continue;
      indicator_levels[i].push_back(level);
      const auto label = p.level_labels.find(level);
      d.columns.push_back(p.label + (label == p.level_labels.end() ? level : label->second));
    }
  }

  d.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d.columns.size()));
  d.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t row = 0; row < rows.size(); ++row) {
    const Record& r = *rows[row];
    const auto ri = static_cast<Eigen::Index>(row);
    Eigen::Index col = 0;
    d.x(ri, col++) = 1.0;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const CovariateValue v = value_of(r, sources[i]);
      if (sources[i].predictor->kind == CovariateKind::numeric) {
        d.x(ri, col++) = std::get<double>(v);
        continue;
      }
      const std::string level = to_string(v);
      for (const auto& l : indicator_levels[i]) d.x(ri, col++) = level == l ? 1.0 : 0.0;
    }
    d.y(ri) = r.score > spec.response_cutoff ? 1.0 : 0.0;
  }
  return d;
}

double log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y(i) * eta(i) - softplus(eta(i));
  return ll;
}

FitResult fit_logistic(const Design& design, double tol, int max_iter) {
  return fit_logistic(design.columns, design.x, design.y, tol, max_iter);
}

FitResult fit_logistic(const std::vector<std::string>& columns, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       double tol, int max_iter) {
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const Eigen::Index n = x.rows(), k = x.cols();
  if (static_cast<Eigen::Index>(columns.size()) != k || y.size() != n) {
    throw std::invalid_argument("design dimensions do not match");
  }
  if (n == 0 || k == 0) throw std::invalid_argument("empty design");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) throw std::invalid_argument("response must be 0/1");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < k) throw std::invalid_argument("design matrix is not of full column rank");

  // Newton steps on the log-likelihood; for the canonical logit link these
  // coincide with IRLS: beta += (X' W X)^-1 X' (y - mu).
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  FitResult fit;
  fit.status = FitStatus::max_iterations;
  for (int iter = 1; iter <= max_iter; ++iter) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd mu(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = sigmoid(eta(i));
      w(i) = mu(i) * (1.0 - mu(i));
    }
    const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
    const Eigen::VectorXd score = x.transpose() * (y - mu);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      fit.status = FitStatus::separation;
      fit.iterations = iter;
      break;
    }
    const Eigen::VectorXd step = ldlt.solve(score);
    beta += step;
    fit.iterations = iter;
    if (!beta.allFinite()) {
      fit.status = FitStatus::separation;
      break;
    }
    if (step.cwiseAbs().maxCoeff() < tol) {
      fit.status = FitStatus::converged;
      break;
    }
  }

  // Standard errors from the inverse Fisher information at the final iterate.
  const Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = sigmoid(eta(i));
    w(i) = m * (1.0 - m);
  }
  const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
  const Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(k, k));

  // Without convergence, saturated fitted probabilities mean the
  // coefficients are diverging: (quasi-)complete separation.
  if (fit.status == FitStatus::max_iterations) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (w(i) < 1e-10) {
        fit.status = FitStatus::separation;
        break;
      }
    }
  }

  fit.n = static_cast<std::size_t>(n);
  fit.log_likelihood = log_likelihood(x, y, beta);
  for (Eigen::Index j = 0; j < k; ++j) {
    Coefficient c;
    c.name = columns[static_cast<std::size_t>(j)];
    c.estimate = beta(j);
    c.std_error = std::sqrt(cov(j, j));
    c.z = c.estimate / c.std_error;
    c.p_value = std::erfc(std::abs(c.z) / std::sqrt(2.0));
    fit.coefficients.push_back(std::move(c));
  }
  return fit;
}

const Coefficient& FitResult::coefficient(std::string_view name) const {
  const auto it =
      std::find_if(coefficients.begin(), coefficients.end(), [&](const Coefficient& c) { return c.name == name; });
  if (it == coefficients.end()) throw std::out_of_range("no coefficient named '" + std::string(name) + "'");
  return *it;
}

double odds_ratio(const FitResult& fit, std::string_view name) { return std::exp(fit.coefficient(name).estimate); }

}  // namespace fairaudit
