#include <doctest.h>

#include <cmath>
#include <sstream>

#include "netdid/errors.hpp"
#include "netdid/montecarlo.hpp"
#include "netdid/report.hpp"

using namespace netdid;

namespace {

McConfig small_mc(int reps) {
  McConfig c;
  c.dgp.kind = DgpKind::AppendixE;
  c.dgp.n = 400;
  c.reps = reps;
  c.base_seed = 3;
  McMethod nglm;
  nglm.name = "nglm";
  nglm.estimand = McEstimand::DattLevel;
  nglm.g = 1;
  McMethod oracle = nglm;
  oracle.name = "oracle";
  oracle.source = NuisanceSource::Oracle;
  McMethod naive = nglm;
  naive.name = "naive";
  naive.estimand = McEstimand::Naive;
  c.methods = {nglm, oracle, naive};
  return c;
}

}  // namespace

TEST_CASE("aggregates of hand-made rows") {
  std::vector<McRow> rows(4);
  const double est[] = {1.0, 3.0, 2.0, 99.0};
  for (int k = 0; k < 4; ++k) {
    rows[k].method = "a";
    rows[k].ok = k < 3;
    rows[k].estimate = est[k];
    rows[k].truth = 1.5;
    rows[k].se_iid = 0.5;
    rows[k].se_hac = k == 1 ? NAN : 1.0;
    rows[k].hac_negative = k == 1;
    rows[k].cover_hac = k == 0;
    rows[k].cover_iid = k != 2;
  }
  rows.push_back(McRow{});
  rows.back().method = "b";
  const auto a = aggregate_rows("a", rows);
  CHECK(a.reps == 4);
  CHECK(a.successes == 3);
  CHECK(a.failures == 1);
  CHECK(a.mean == doctest::Approx(2.0));
  CHECK(a.bias == doctest::Approx(0.5));
  CHECK(a.sd == doctest::Approx(1.0));
  CHECK(a.mc_se == doctest::Approx(1.0 / std::sqrt(3.0)));
  // rmse: sqrt((0.25 + 2.25 + 0.25) / 3)
  CHECK(a.rmse == doctest::Approx(std::sqrt(2.75 / 3)));
  CHECK(a.hac_negative == 1);
  CHECK(a.mean_se_hac == doctest::Approx(1.0));
  CHECK(a.coverage_hac == doctest::Approx(0.5));
  CHECK(a.coverage_iid == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("one replication aggregates to its own row") {
  const auto r = run_monte_carlo(small_mc(1));
  REQUIRE(r.rows.size() == 3);
  REQUIRE(r.aggregates.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& row = r.rows[k];
    const auto& agg = r.aggregates[k];
    CHECK(row.method == agg.method);
    REQUIRE(row.ok);
    CHECK(agg.mean == row.estimate);
    CHECK(agg.sd == 0.0);
    CHECK(agg.bias == doctest::Approx(row.estimate - row.truth));
    CHECK(row.seed == 3);
  }
  CHECK(r.rows[1].truth == doctest::Approx(0.4));
}

TEST_CASE("Monte Carlo output does not depend on the worker count") {
  auto c = small_mc(4);
  c.jobs = 1;
  const auto a = run_monte_carlo(c);
  c.jobs = 3;
  const auto b = run_monte_carlo(c);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].estimate == b.rows[k].estimate);
    CHECK(a.rows[k].seed == b.rows[k].seed);
    CHECK(a.rows[k].rep == b.rows[k].rep);
  }
}

TEST_CASE("Monte Carlo config validation") {
  auto c = small_mc(1);
  c.methods[1].name = "nglm";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_mc(1);
  c.dgp.kind = DgpKind::MainS6;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);  // oracle needs known nuisances
  c = small_mc(0);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(parse_mc_estimand("datt_g") == McEstimand::DattLevel);
  CHECK(parse_nuisance_source("wrong_both") == NuisanceSource::WrongBoth);
}

TEST_CASE("config JSON round trips") {
  LearnerConfig l;
  l.learner = LearnerKind::Gnn;
  l.L = 2;
  l.H = 3;
  l.lr = 0.05;
  const auto l2 = learner_from_json(to_json(l));
  CHECK(to_json(l2) == to_json(l));

  DgpConfig d;
  d.kind = DgpKind::AppendixE;
  d.radius = 0.05;
  d.exposure = {ExposureKind::Count, 2};
  d.theta_post = {0.1, 0.2, 0.3, 0.4};
  CHECK(to_json(dgp_from_json(to_json(d))) == to_json(d));

  const auto mc = small_mc(7);
  CHECK(to_json(mc_from_json(to_json(mc))) == to_json(mc));
}

TEST_CASE("config readers reject unknown keys and wrong types") {
  CHECK_THROWS_AS(learner_from_json(Json{{"learnr", "gnn"}}), std::invalid_argument);
  CHECK_THROWS_AS(learner_from_json(Json{{"L", "two"}}), std::invalid_argument);
  CHECK_THROWS_AS(dgp_from_json(Json{{"theta_d", {1.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(dgp_from_json(Json{{"seed", -1}}), std::invalid_argument);
  CHECK_THROWS_AS(mc_from_json(Json{{"reps", 2}, {"extra", 1}}), std::invalid_argument);
  try {
    learner_from_json(Json{{"learnr", "gnn"}});
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("learnr") != std::string::npos);
  }
}

TEST_CASE("exposure accepts a kind string or a nested object") {
  CHECK(exposure_from_json(Json("count")).kind == ExposureKind::Count);
  const auto m = exposure_from_json(Json{{"kind", "count"}, {"cap", 2}});
  CHECK(m.kind == ExposureKind::Count);
  CHECK(m.cap == 2);
  CHECK_THROWS_AS(exposure_from_json(Json{{"kind", "count"}, {"k", 2}}), std::invalid_argument);
  CHECK_THROWS_AS(exposure_from_json(Json(3)), std::invalid_argument);
  const auto d = dgp_from_json(Json{{"exposure", {{"kind", "count"}, {"cap", 4}}}});
  CHECK(d.exposure.cap == 4);
}

TEST_CASE("report serialization") {
  EstimateReport r;
  r.estimand = "datt";
  r.estimate = 0.3;
  r.se_hac = NAN;
  r.hac_negative = true;
  r.scores.members = NodeSet::range(2);
  r.scores.scores = {0.25, 0.5};
  const auto j = to_json(r, true);
  CHECK(j.at("se_hac").is_null());
  CHECK(j.at("hac_negative") == true);
  CHECK(j.at("estimate") == 0.3);
  std::ostringstream os;
  write_scores_csv(os, r, {"a", "b"});
  CHECK(os.str() == "id,node,score\na,0,0.25\nb,1,0.5\n");
  CHECK_THROWS_AS(read_json_file("/nonexistent/x.json"), DataError);
}
