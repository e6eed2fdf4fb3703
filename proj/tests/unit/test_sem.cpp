#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "causalkit/dataset.hpp"
#include "causalkit/errors.hpp"
#include "causalkit/linalg.hpp"
#include "causalkit/sem.hpp"
#include "doctest.h"

using namespace causalkit;

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// mean of y restricted to rows where flag == value
double mean_where(const std::vector<double>& y, const std::vector<double>& flag,
                  double value) {
  double s = 0;
  int n = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    if (flag[i] == value) {
      s += y[i];
      ++n;
    }
  }
  REQUIRE(n > 0);
  return s / n;
}

// The worked mediation graph with every edge coefficient 1 and unit noise.
StructuralModel linear_mediation_model() {
  StructuralModel m;
  m.add_node("Z1", Equation::linear(0, {}));
  m.add_node("Z2", Equation::linear(0, {}));
  m.add_node("X1", Equation::linear(0, {{"Z1", 1}}));
  m.add_node("X2", Equation::linear(0, {{"Z1", 1}, {"Z2", 1}}));
  m.add_node("X3", Equation::linear(0, {{"Z2", 1}}));
  m.add_node("D", Equation::linear(0, {{"X1", 1}, {"X2", 1}}));
  m.add_node("M", Equation::linear(0, {{"D", 1}}));
  m.add_node("Y", Equation::linear(0, {{"X2", 1}, {"X3", 1}, {"M", 1}}));
  return m;
}

}  // namespace

TEST_CASE("model construction is validated") {
  StructuralModel m;
  m.add_node("A", Equation::linear(0, {}));
  CHECK_THROWS_AS(m.add_node("A", Equation::linear(0, {})), Error);  // dup
  CHECK_THROWS_AS(m.add_node("bad name", Equation::linear(0, {})), Error);
  try {
    m.add_node("B", Equation::linear(0, {{"missing", 1}}));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kName);  // parent must already exist
  }
  CHECK_THROWS_AS(NoiseSpec::normal(0, -1), Error);
  CHECK_THROWS_AS(NoiseSpec::bernoulli(1.5), Error);
  CHECK_THROWS_AS(NoiseSpec::uniform(2, 1), Error);
  CHECK_THROWS_AS(m.intervene("missing", 1.0), Error);
  CHECK_THROWS_AS(m.simulate(0, 7), Error);
  CHECK_THROWS_AS(m.equation_of("missing"), Error);
}

TEST_CASE("the implied graph follows the coefficient keys") {
  const StructuralModel m = linear_mediation_model();
  const Dag g = m.graph();
  CHECK(g.size() == 8);
  CHECK(g.has_edge("Z1", "X2"));
  CHECK(g.has_edge("M", "Y"));
  CHECK_FALSE(g.has_edge("D", "Y"));
  CHECK(m.equation_of("Y").coef.at("M") == 1.0);
  CHECK(m.noise_of("Y").kind == NoiseSpec::Kind::kNormal);
}

TEST_CASE("simulation is deterministic in the seed and layout") {
  const StructuralModel m = linear_mediation_model();
  const Dataset a = m.simulate(64, 11);
  const Dataset b = m.simulate(64, 11);
  const Dataset c = m.simulate(64, 12);
  CHECK(a.to_csv_text() == b.to_csv_text());
  CHECK(a.to_csv_text() != c.to_csv_text());
  CHECK(a.columns() == std::vector<std::string>{"Z1", "Z2", "X1", "X2", "X3",
                                                "D", "M", "Y"});
  // structural identity: Y = X2 + X3 + M + noise, noise has unit scale
  const auto& y = a.column("Y");
  const auto& x2 = a.column("X2");
  REQUIRE(y.size() == 64);
  CHECK(y != x2);
}

TEST_CASE("noise kinds produce values in their supports") {
  StructuralModel m;
  m.add_node("B", Equation::linear(0, {}, 1), NoiseSpec::bernoulli(0.3));
  m.add_node("U", Equation::linear(0, {}, 1), NoiseSpec::uniform(-2, 5));
  m.add_node("T", Equation::threshold(0.1, {{"U", 0.5}}, 1),
             NoiseSpec::normal(0, 1));
  const Dataset ds = m.simulate(4000, 3);
  for (double v : ds.column("B")) CHECK((v == 0.0 || v == 1.0));
  for (double v : ds.column("U")) {
    CHECK(v > -2.0);
    CHECK(v < 5.0);
  }
  for (double v : ds.column("T")) CHECK((v == 0.0 || v == 1.0));
  const double bmean = mean_of(ds.column("B"));
  CHECK(bmean == doctest::Approx(0.3).epsilon(0.1));
}

TEST_CASE("intervening keeps upstream draws bit for bit") {
  const Scenario sc = make_scenario("smoking_bias", {{"eta1", 0.7}});
  const Dataset obs = sc.model.simulate(256, 21);
  const Dataset forced = sc.model.intervene("D", 1.0).simulate(256, 21);
  CHECK(obs.column("U") == forced.column("U"));  // identical exogenous draws
  for (double v : forced.column("D")) CHECK(v == 1.0);
  // Y = U + eta1 * D exactly (its equation carries no noise)
  const auto& y = forced.column("Y");
  const auto& u = forced.column("U");
  for (size_t i = 0; i < y.size(); ++i) {
    CHECK(y[i] == doctest::Approx(u[i] + 0.7).epsilon(1e-14));
  }
}

TEST_CASE("confounded smoking scenario has a biased crude contrast") {
  const Scenario sc = make_scenario("smoking_bias");
  CHECK(sc.treatment == "D");
  CHECK(sc.outcome == "Y");
  CHECK(sc.covariates.empty());
  const Dataset ds = sc.model.simulate(400000, 5);
  const auto& y = ds.column("Y");
  const auto& d = ds.column("D");
  const double crude = mean_where(y, d, 1.0) - mean_where(y, d, 0.0);
  // 2 * rho * sqrt(2/pi) with rho = -0.5
  CHECK(crude == doctest::Approx(-std::sqrt(2.0 / M_PI)).epsilon(0.03));

  const CounterfactualDraws cf =
      counterfactual_pairs(sc.model, "D", "Y", 2000, 5);
  for (size_t i = 0; i < cf.y0.size(); ++i) CHECK(cf.y1[i] == cf.y0[i]);

  const Scenario eff = make_scenario("smoking_bias", {{"eta1", 0.7}});
  const CounterfactualDraws cf2 =
      counterfactual_pairs(eff.model, "D", "Y", 2000, 5);
  double worst = 0;
  for (size_t i = 0; i < cf2.y0.size(); ++i) {
    worst = std::max(worst, std::abs(cf2.y1[i] - cf2.y0[i] - 0.7));
  }
  CHECK(worst < 1e-14);
  CHECK(cf2.natural.size() == 2000);
}

TEST_CASE("heart transplant scenario matches its design probabilities") {
  const Scenario sc = make_scenario("heart_transplant");
  CHECK(sc.treatment == "A");
  CHECK(sc.outcome == "Y");
  CHECK(sc.covariates == std::vector<std::string>{"L"});
  const int n = 200000;
  const Dataset ds = sc.model.simulate(n, 9);
  const auto& l = ds.column("L");
  const auto& a = ds.column("A");
  const auto& y = ds.column("Y");
  CHECK(mean_of(l) == doctest::Approx(0.6).epsilon(0.02));
  CHECK(mean_where(a, l, 1.0) == doctest::Approx(0.75).epsilon(0.02));
  CHECK(mean_where(a, l, 0.0) == doctest::Approx(0.50).epsilon(0.02));
  CHECK(mean_where(y, l, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(0.02));
  CHECK(mean_where(y, l, 0.0) == doctest::Approx(0.25).epsilon(0.02));
  // treatment is ignorable given L, so the effect is exactly zero pointwise
  const CounterfactualDraws cf =
      counterfactual_pairs(sc.model, "A", "Y", 4000, 9);
  for (size_t i = 0; i < cf.y0.size(); ++i) CHECK(cf.y1[i] == cf.y0[i]);
  // but the crude contrast is confounded upward through L
  const double crude = mean_where(y, a, 1.0) - mean_where(y, a, 0.0);
  CHECK(crude > 0.05);

  const Scenario flat = make_scenario("heart_transplant", {{"q", 0.25}});
  const Dataset ds2 = flat.model.simulate(n, 10);
  CHECK(mean_of(ds2.column("L")) == doctest::Approx(0.25).epsilon(0.03));
}

TEST_CASE("high dimensional growth scenario has the documented layout") {
  const Scenario sc = make_scenario("growth_highdim");
  CHECK(sc.treatment == "D");
  CHECK(sc.outcome == "Y");
  REQUIRE(sc.covariates.size() == 60);
  CHECK(sc.covariates.front() == "W1");
  CHECK(sc.covariates.back() == "W60");
  const Dag g = sc.model.graph();
  CHECK(g.has_edge("W1", "W2"));
  CHECK(g.has_edge("W5", "D"));
  CHECK_FALSE(g.has_edge("W6", "D"));
  CHECK(g.has_edge("W5", "Y"));
  CHECK_FALSE(g.has_edge("W6", "Y"));
  CHECK(g.has_edge("D", "Y"));

  const Dataset ds = sc.model.simulate(20000, 2);
  CHECK(ds.n_cols() == 62);
  // AR(1) with coefficient 0.5 and innovation variance 0.75 is stationary
  // with unit variance at every index
  const auto& w60 = ds.column("W60");
  double var = 0;
  const double m60 = mean_of(w60);
  for (double v : w60) var += (v - m60) * (v - m60);
  var /= static_cast<double>(w60.size() - 1);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
  Eigen::Map<const Eigen::VectorXd> w1(ds.column("W1").data(), 20000);
  Eigen::Map<const Eigen::VectorXd> w2(ds.column("W2").data(), 20000);
  const Eigen::MatrixXd none(20000, 0);
  CHECK(partial_correlation(w1, w2, none) == doctest::Approx(0.5).epsilon(0.05));

  const Scenario small =
      make_scenario("growth_highdim", {{"p", 8}, {"s", 2}});
  CHECK(small.model.size() == 10);
  CHECK_THROWS_AS(make_scenario("growth_highdim", {{"s", 99}}), Error);
}

TEST_CASE("scenario names and parameters are validated") {
  CHECK_THROWS_AS(make_scenario("nope"), Error);
  CHECK_THROWS_AS(make_scenario("smoking_bias", {{"bogus", 1}}), Error);
  CHECK_THROWS_AS(make_scenario("heart_transplant", {{"q", 1.5}}), Error);
  CHECK_THROWS_AS(counterfactual_pairs(make_scenario("smoking_bias").model,
                                       "missing", "Y", 10, 0),
                  Error);
}

TEST_CASE("simulated correlations track graph separation") {
  const StructuralModel m = linear_mediation_model();
  const Dag g = m.graph();
  const int n = 50000;
  const Dataset ds = m.simulate(n, 17);

  struct Case {
    std::string x, y;
    std::vector<std::string> given;
    bool separated;
  };
  const std::vector<Case> cases = {
      {"Z1", "Z2", {}, true},
      {"Z1", "Z2", {"X2"}, false},
      {"X1", "X3", {}, true},
      {"X1", "X3", {"D"}, false},  // conditioning on a collider's descendant
      {"M", "X2", {"D"}, true},
      {"D", "Y", {}, false},
      {"D", "Y", {"X2", "X3"}, false},
  };
  for (const auto& c : cases) {
    CAPTURE(c.x);
    CAPTURE(c.y);
    CHECK(d_separated(g, c.x, c.y, c.given) == c.separated);
    Eigen::Map<const Eigen::VectorXd> vx(ds.column(c.x).data(), n);
    Eigen::Map<const Eigen::VectorXd> vy(ds.column(c.y).data(), n);
    Eigen::MatrixXd controls(n, static_cast<int>(c.given.size()));
    for (size_t j = 0; j < c.given.size(); ++j) {
      controls.col(static_cast<int>(j)) =
          Eigen::Map<const Eigen::VectorXd>(ds.column(c.given[j]).data(), n);
    }
    const double pc = partial_correlation(vx, vy, controls);
    if (c.separated) {
      CHECK(std::abs(pc) < 0.02);
    } else {
      CHECK(std::abs(pc) > 0.05);
    }
  }
}
