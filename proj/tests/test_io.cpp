#include <doctest.h>

#include "dissip/examples.hpp"
#include "dissip/io.hpp"

using namespace dissip;

namespace {

std::string error_path(const json& j) {
  try {
    problem_from_json(j);
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "";
}

json lti_problem() {
  return json::parse(R"({
    "subsystems": [{"type": "lti", "A": [[-1]], "B": [[1]], "C": [[1]]}],
    "M": [[0, 1], [1, 0]],
    "dims": {"pd": 1, "me": 1},
    "objective": {"kind": "l2_gain", "gamma": 2.0}
  })");
}

json fake_result(const std::string& name, int n, const std::string& outcome, int iters, double ms) {
  return {{"name", name}, {"n_subsystems", n}, {"outcome", outcome}, {"iterations", iters}, {"wall_ms", ms}};
}

}  // namespace

TEST_CASE("problem round trip") {
  RationalParams poly;
  poly.polynomial = true;
  const std::vector<Problem> problems = {gen_skew(6, 1),          gen_rational(3, 2),        gen_rational(2, 3, poly),
                                         gen_poly(3, 4),          gen_platoon(4, true, 0.8), gen_platoon(3, false),
                                         gen_iqc_pair(true, 2),   gen_iqc_pair(false)};
  for (const auto& p : problems) {
    const json j = problem_to_json(p);
    const Problem q = problem_from_json(json::parse(j.dump()));
    CHECK(problem_to_json(q) == j);
    CHECK((q.M - p.M).norm() == 0.0);
    CHECK(q.subsystems.size() == p.subsystems.size());
    CHECK(q.pins.size() == p.pins.size());
    CHECK(q.iqc.has_value() == p.iqc.has_value());
    CHECK(q.storage_floor == p.storage_floor);
  }
  const Problem r = gen_rational(2, 5);
  const Problem q = problem_from_json(problem_to_json(r));
  const auto& a = std::get<RationalSubsystem>(r.subsystems[1]);
  const auto& b = std::get<RationalSubsystem>(q.subsystems[1]);
  for (size_t k = 0; k < a.p.size(); ++k) CHECK(a.p[k].terms() == b.p[k].terms());
}

TEST_CASE("empty matrices") {
  const MatrixXd e(0, 3);
  const MatrixXd back = matrix_from_json(matrix_to_json(e));
  CHECK(back.rows() == 0);
  CHECK(back.cols() == 3);
}

TEST_CASE("schema errors carry paths") {
  CHECK_NOTHROW(problem_from_json(lti_problem()));
  json j = lti_problem();
  j["subsystems"][0].erase("A");
  CHECK(error_path(j) == "/subsystems/0/A");
  j = lti_problem();
  j["subsystems"][0]["C"] = json::parse("[[1, 2]]");
  CHECK(error_path(j) == "/subsystems/0/C");
  j = lti_problem();
  j["M"] = json::parse("[[0, 1], [1]]");
  CHECK(error_path(j) == "/M/1");
  j = lti_problem();
  j["subsystems"][0]["type"] = "pde";
  CHECK(error_path(j) == "/subsystems/0/type");
  j = lti_problem();
  j["objective"]["gamma"] = "big";
  CHECK(error_path(j) == "/objective/gamma");
  j = lti_problem();
  j["pins"] = json::parse(R"([{"subsystem": 0, "entry": [0, 5], "value": 1}])");
  CHECK(error_path(j) == "/pins/0/entry");
  j = lti_problem();
  j["subsystems"][0] = json::parse(R"({"type": "poly", "f": ["-x1 + u1", "x1 +* 2"], "h": ["x1"]})");
  CHECK(error_path(j) == "/subsystems/0/f/1");
  j = lti_problem();
  j["subsystems"][0]["D"] = json::parse("[[0.5]]");
  CHECK(error_path(j) == "/subsystems/0/D");
}

TEST_CASE("results and reports") {
  RunConfig cfg;
  cfg.problem = "p.json";
  Problem p;
  p.subsystems.push_back(LtiSubsystem{-MatrixXd::Identity(1, 1), MatrixXd::Identity(1, 1), MatrixXd::Identity(1, 1)});
  p.M = MatrixXd(2, 2);
  p.M << 0, 1, 1, 0;
  p.pd = p.me = 1;
  p.objective.kind = Objective::Kind::l2_gain;
  p.objective.gamma = 2.0;
  const CertResult r = run(p);
  const json res = results_to_json(r, cfg, "p.residuals.csv");
  CHECK(res["outcome"] == "Certified");
  CHECK(res["config"]["max_iters"] == 500);
  CHECK(res["certificates"][0].contains("P"));
  CHECK(res["n_subsystems"] == 1);

  std::vector<json> batch;
  for (int i = 0; i < 20; ++i) batch.push_back(fake_result("s" + std::to_string(i), 20, "Certified", 5 + i % 4, 10.0));
  const std::string cum = cumulative_iterations_csv(batch);
  CHECK(cum.rfind("8,1\n") == cum.size() - 4);
  CHECK(cumulative_iterations_csv(batch) == cum);
  CHECK(cumulative_iterations_svg(batch).find("<svg") == 0);

  const std::string one = runtime_table_csv({res});
  CHECK(std::count(one.begin(), one.end(), '\n') == 2);
  CHECK(runtime_table_svg({res}).find("</svg>") != std::string::npos);
  CHECK_THROWS(runtime_table_csv({}));
  CHECK_THROWS(cumulative_iterations_csv({}));
}
