#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "fairaudit/error.hpp"
#include "fairaudit/regress.hpp"

using namespace fairaudit;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

// Rows with a 0/1 indicator x: counts of (x, y) cells.
void saturated(int n00, int n01, int n10, int n11, Eigen::MatrixXd& x, Eigen::VectorXd& y) {
  const int n = n00 + n01 + n10 + n11;
  x.resize(n, 2);
  y.resize(n);
  int i = 0;
  auto put = [&](int count, double xv, double yv) {
    for (int c = 0; c < count; ++c, ++i) {
      x(i, 0) = 1.0;
      x(i, 1) = xv;
      y(i) = yv;
    }
  };
  put(n00, 0, 0);
  put(n01, 0, 1);
  put(n10, 1, 0);
  put(n11, 1, 1);
}

void random_design(std::mt19937_64& rng, int n, Eigen::MatrixXd& x, Eigen::VectorXd& y) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  x.resize(n, 4);
  y.resize(n);
  const double beta[] = {-0.3, 0.8, -0.5, 0.2};
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = z(rng);
    x(i, 2) = u(rng) < 0.4 ? 1.0 : 0.0;
    x(i, 3) = 20.0 + 10.0 * u(rng);
    double eta = 0.0;
    for (int j = 0; j < 4; ++j) eta += beta[j] * (j == 3 ? (x(i, 3) - 25.0) / 5.0 : x(i, j));
    y(i) = u(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
  }
}

const std::vector<std::string> kCols4 = {"(Intercept)", "a", "b", "c"};

Schema regress_schema() {
  Schema s;
  s.groups = {"b", "w"};
  s.covariates = {{"age", "age", CovariateKind::numeric}, {"sex", "sex", CovariateKind::categorical}};
  return s;
}

}  // namespace

TEST_CASE("saturated 2x2 fit matches the closed form") {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  saturated(40, 25, 17, 33, x, y);
  const auto fit = fit_logistic({"(Intercept)", "x"}, x, y);
  REQUIRE(fit.converged());
  CHECK(std::abs(fit.coefficients[0].estimate - logit(25.0 / 65.0)) <= 1e-8);
  CHECK(std::abs(fit.coefficients[1].estimate - (logit(33.0 / 50.0) - logit(25.0 / 65.0))) <= 1e-8);
  CHECK(std::abs(fit.coefficients[1].std_error - std::sqrt(1.0 / 40 + 1.0 / 25 + 1.0 / 17 + 1.0 / 33)) <= 1e-8);
  CHECK(std::abs(fit.coefficients[0].std_error - std::sqrt(1.0 / 40 + 1.0 / 25)) <= 1e-8);
}

TEST_CASE("zero effect gives a zero coefficient") {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  saturated(30, 10, 60, 20, x, y);
  const auto fit = fit_logistic({"(Intercept)", "x"}, x, y);
  CHECK(std::abs(fit.coefficients[1].estimate) <= 1e-10);
  CHECK(fit.coefficients[1].p_value == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("score equations vanish and SEs match a finite-difference Hessian") {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 5; ++t) {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    random_design(rng, 800, x, y);
    const auto fit = fit_logistic(kCols4, x, y);
    REQUIRE(fit.converged());
    Eigen::VectorXd beta(4);
    for (int j = 0; j < 4; ++j) beta(j) = fit.coefficients[j].estimate;

    Eigen::VectorXd mu(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) mu(i) = 1.0 / (1.0 + std::exp(-x.row(i).dot(beta)));
    CHECK((x.transpose() * (y - mu)).cwiseAbs().maxCoeff() <= 1e-6);

    // Central second differences of the log-likelihood.
    Eigen::MatrixXd h(4, 4);
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        const double ea = 1e-4 * std::max(1.0, std::abs(beta(a))) / (a == 3 ? 10.0 : 1.0);
        const double eb = 1e-4 * std::max(1.0, std::abs(beta(b))) / (b == 3 ? 10.0 : 1.0);
        auto ll = [&](double da, double db) {
          Eigen::VectorXd v = beta;
          v(a) += da;
          v(b) += db;
          return log_likelihood(x, y, v);
        };
        h(a, b) = (ll(ea, eb) - ll(ea, -eb) - ll(-ea, eb) + ll(-ea, -eb)) / (4 * ea * eb);
      }
    }
    const Eigen::MatrixXd cov = (-h).inverse();
    for (int j = 0; j < 4; ++j) {
      const double se_fd = std::sqrt(cov(j, j));
      CHECK(std::abs(fit.coefficients[j].std_error - se_fd) / se_fd <= 1e-4);
    }
  }
}

TEST_CASE("row permutation does not change the fit") {
  std::mt19937_64 rng(59);
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  random_design(rng, 500, x, y);
  std::vector<int> order(500);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Eigen::MatrixXd xp(500, 4);
  Eigen::VectorXd yp(500);
  for (int i = 0; i < 500; ++i) {
    xp.row(i) = x.row(order[i]);
    yp(i) = y(order[i]);
  }
  const auto a = fit_logistic(kCols4, x, y), b = fit_logistic(kCols4, xp, yp);
  for (int j = 0; j < 4; ++j) {
    CHECK(a.coefficients[j].estimate == doctest::Approx(b.coefficients[j].estimate).epsilon(1e-9));
    CHECK(a.coefficients[j].std_error == doctest::Approx(b.coefficients[j].std_error).epsilon(1e-9));
  }
}

TEST_CASE("rank deficiency and separation") {
  Eigen::MatrixXd x(4, 3);
  x << 1, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1, 1;
  Eigen::VectorXd y(4);
  y << 0, 1, 1, 0;
  CHECK_THROWS_AS(fit_logistic({"a", "b", "c"}, x, y), std::invalid_argument);

  Eigen::MatrixXd xs(6, 2);
  xs << 1, 1, 1, 2, 1, 3, 1, 4, 1, 5, 1, 6;
  Eigen::VectorXd ys(6);
  ys << 0, 0, 0, 1, 1, 1;
  const auto fit = fit_logistic({"(Intercept)", "x"}, xs, ys);
  CHECK(fit.status == FitStatus::separation);
  CHECK_FALSE(fit.converged());

  Eigen::VectorXd bad(6);
  bad << 0, 2, 0, 1, 1, 1;
  CHECK_THROWS_AS(fit_logistic({"(Intercept)", "x"}, xs, bad), std::invalid_argument);
}

TEST_CASE("design construction") {
  const std::vector<Record> records = {
      {"b", 7, 0, {30.0, std::string("Male")}},   {"w", 2, 0, {40.0, std::string("Female")}},
      {"b", 3, 0, {22.0, std::string("Female")}}, {"w", 9, 0, {CovariateValue{}, std::string("Male")}},
      {"b", 9, 1, {50.0, std::string("Male")}},
  };
  const Dataset ds(regress_schema(), records);
  const auto spec = DesignSpec::from_config(KeyValueConfig::parse(
      "predictors = race, age, sex\n"
      "predictor.race.source = @group\npredictor.race.reference = w\npredictor.race.level.b = Black\n"
      "predictor.age.source = age\npredictor.age.label = Age\n"
      "predictor.sex.source = sex\npredictor.sex.kind = categorical\npredictor.sex.reference = Female\n"));
  const auto d = build_design(ds, spec);
  CHECK(d.columns == std::vector<std::string>{"(Intercept)", "raceBlack", "Age", "sexMale"});
  CHECK(d.excluded_missing == 1);
  REQUIRE(d.x.rows() == 3);
  CHECK(d.x(0, 1) == 1.0);
  CHECK(d.x(0, 2) == 30.0);
  CHECK(d.x(0, 3) == 1.0);
  CHECK(d.y(0) == 1.0);
  CHECK(d.y(1) == 0.0);

  DesignSpec bad_ref = spec;
  bad_ref.predictors[2].reference = "Other";
  CHECK_THROWS_AS(build_design(ds, bad_ref), ConfigError);
  DesignSpec unknown = spec;
  unknown.predictors[1].source = "height";
  CHECK_THROWS_AS(build_design(ds, unknown), ConfigError);
  CHECK_THROWS_AS(DesignSpec::from_config(KeyValueConfig::parse("predictors = a\npredictor.a.source = x\n"
                                                                "predictor.a.kind = ordinal\n")),
                  ConfigError);
  CHECK_FALSE(DesignSpec::from_config(KeyValueConfig::parse("subset_outcome = all\npredictors = a\n"
                                                            "predictor.a.source = age\n"))
                  .subset_outcome.has_value());
}

TEST_CASE("COMPAS regressions" * doctest::skip(!std::filesystem::exists(FAIRAUDIT_DATA_FILE))) {
  const auto ds = load_csv(FAIRAUDIT_DATA_FILE, Schema::load(FAIRAUDIT_CONFIG_DIR "/compas.cfg"));
  const auto t5 = fit_logistic(build_design(ds, DesignSpec::load(FAIRAUDIT_CONFIG_DIR "/race-only.cfg")));
  CHECK(t5.coefficient("(Intercept)").estimate == doctest::Approx(-1.183).epsilon(0.001));
  CHECK(t5.coefficient("raceBlack").estimate == doctest::Approx(0.976).epsilon(0.001));
  CHECK(t5.coefficient("raceBlack").std_error == doctest::Approx(0.077).epsilon(0.01));
  const auto t6 = fit_logistic(build_design(ds, DesignSpec::load(FAIRAUDIT_CONFIG_DIR "/race-adjusted.cfg")));
  CHECK(t6.coefficient("raceBlack").estimate == doctest::Approx(0.547).epsilon(0.002));
  CHECK(t6.coefficient("chargeMisdemeanor").p_value == doctest::Approx(0.2123).epsilon(0.002));
}
