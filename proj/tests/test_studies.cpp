#include "ddcm/errors.hpp"
#include "ddcm/result_io.hpp"
#include "ddcm/studies.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace ddcm;
using doctest::Approx;

namespace {

ConvergenceStudySpec tiny_study() {
  ConvergenceStudySpec s;
  s.setup.truss = TrussSpec{.levels = 2, .bays = 1};
  s.set_sizes = {100, 400};
  s.samples_per_cell = 3;
  s.seed = 42;
  return s;
}

}  // namespace

TEST_CASE("scheme names") {
  for (const char* name : {"min-dist", "min-dist/ten-vote", "max-ent", "max-ent/ten-vote"})
    CHECK(SchemeVariant::parse(name).name() == name);
  CHECK(SchemeVariant::parse("max-ent/classic") == SchemeVariant{Scheme::MaxEnt, false});
  CHECK_THROWS_AS(SchemeVariant::parse("newton"), InvalidArgument);
}

TEST_CASE("statistics helpers") {
  CHECK(loglog_slope({1, 10, 100}, {5, 0.5, 0.05}) == Approx(-1.0));
  CHECK(loglog_slope({2, 4, 8, 16}, {3, 12, 48, 192}) == Approx(2.0));
  CHECK(std::isnan(loglog_slope({1}, {1})));
  CHECK_THROWS_AS(loglog_slope({1, 2}, {1}), DimensionError);
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK(median({1, std::numeric_limits<double>::quiet_NaN(), 5}) == 3.0);
  CHECK(std::isnan(median({})));
  CHECK(cell_seed(1, 2, 3) == cell_seed(1, 2, 3));
  CHECK(cell_seed(1, 2, 3) != cell_seed(1, 3, 2));
}

TEST_CASE("single-cell convergence study") {
  auto s = tiny_study();
  s.set_sizes = {200};
  s.samples_per_cell = 1;
  s.schemes = {{Scheme::MinDist, false}};
  const auto r = run_convergence_study(s);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].status == "ok");
  CHECK(r.rows[0].distance > 0.0);
  REQUIRE(r.summary.size() == 1);
  CHECK(r.summary[0].median_distance == r.rows[0].distance);
  CHECK(std::isnan(r.summary[0].slope));
}

TEST_CASE("convergence study output is reproducible") {
  auto s = tiny_study();
  const auto a = run_convergence_study(s);
  CHECK(a.rows.size() == 2 * 2 * 3);
  CHECK(a.summary.size() == 4);
  for (const auto& row : a.rows) CHECK(row.distance >= 0.0);
  s.threads = 3;
  const auto b = run_convergence_study(s);
  CHECK(convergence_csv(a, false) == convergence_csv(b, false));
  CHECK(convergence_summary_csv(a) == convergence_summary_csv(b));

  const auto csv = convergence_csv(a, true);
  CHECK(csv.rfind("scheme,n,sample,distance,iterations,wall_time,status\n", 0) == 0);
  CHECK(convergence_csv(a, false).rfind("scheme,n,sample,distance,iterations,status\n", 0) == 0);
  CHECK(convergence_summary_csv(a).rfind("scheme,n,samples,median_distance,slope\n", 0) == 0);
  CHECK(convergence_table(a).find("min-dist/ten-vote") != std::string::npos);

  s.seed = 43;
  CHECK(convergence_csv(run_convergence_study(s), false) != convergence_csv(a, false));
}

TEST_CASE("convergence study input validation") {
  auto s = tiny_study();
  s.set_sizes = {400, 100};
  CHECK_THROWS_AS(run_convergence_study(s), InvalidArgument);
  s = tiny_study();
  s.samples_per_cell = 0;
  CHECK_THROWS_AS(run_convergence_study(s), InvalidArgument);
  s = tiny_study();
  s.schemes.clear();
  CHECK_THROWS_AS(run_convergence_study(s), InvalidArgument);
}

TEST_CASE("failing runs are recorded, not fatal") {
  auto s = tiny_study();
  s.set_sizes = {5};
  s.samples_per_cell = 1;
  // voting needs more points than neighbors; the classic scheme still runs
  const auto r = run_convergence_study(s);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].scheme == "min-dist");
  CHECK(r.rows[0].status == "ok");
  CHECK(r.rows[1].status.rfind("error: ", 0) == 0);
  CHECK(std::isnan(r.rows[1].distance));
  CHECK(convergence_csv(r, false).find("error: ") != std::string::npos);
}

TEST_CASE("voting study") {
  VotingStudySpec s;
  s.set_sizes = {100, 400};
  s.sigmas = {0.25};
  s.samples_per_cell = 2;
  s.reference_samples = 20000;
  const auto r = run_voting_study(s);
  CHECK(r.rows.size() == 4);
  REQUIRE(r.summary.size() == 2);
  for (const auto& row : r.rows) {
    CHECK(row.status == "ok");
    CHECK(row.delta_theta_deg >= 0.0);
    CHECK(row.delta_theta_deg < 90.0);
  }
  CHECK(voting_csv(r).rfind("n,sigma,noise,sample,delta_theta_deg,status\n", 0) == 0);
  CHECK(voting_summary_csv(r).rfind("n,sigma,noise,median_delta_theta_deg\n", 0) == 0);
  s.threads = 2;
  CHECK(voting_csv(run_voting_study(s)) == voting_csv(r));
  s.sigmas = {0.0};
  CHECK_THROWS_AS(run_voting_study(s), InvalidArgument);
}

TEST_CASE("coverage report") {
  BenchmarkSetup setup;
  setup.truss = TrussSpec{.levels = 2, .bays = 1};
  const auto p = setup.problem();
  const auto ref = newton_reference_solve(p, setup.law());

  SUBCASE("data containing the exact solution") {
    const MaterialDataSet ds(ref.z.states, setup.metric());
    const auto rows = run_coverage_report(p, ref.z.states, share_dataset(ds, p.size()));
    REQUIRE(rows.size() == p.size());
    for (const auto& r : rows) CHECK(r.distance == Approx(0.0).scale(1.0));
    CHECK(coverage_csv(rows).rfind("point,x,y,z,distance\n", 0) == 0);
  }
  SUBCASE("distances are non-negative") {
    const auto ds = share_dataset(sample_dataset(setup.data_spec(50, 0.0, 1)), p.size());
    const auto r = solve(p, ds, SolverConfig{});
    for (const auto& row : run_coverage_report(p, r.z.states, ds)) CHECK(row.distance >= 0.0);
  }
  CHECK_THROWS_AS(run_coverage_report(p, {}, {}), InvalidArgument);
}

TEST_CASE("result file round trip") {
  BenchmarkSetup setup;
  setup.truss = TrussSpec{.levels = 2, .bays = 1};
  const auto p = setup.problem();
  const auto ds = share_dataset(sample_dataset(setup.data_spec(300, 0.0, 1)), p.size());
  SolverConfig cfg;
  cfg.scheme = Scheme::MaxEnt;
  const auto r = solve(p, ds, cfg);
  const auto stored = to_stored(r, "max-ent");
  const auto path = std::filesystem::temp_directory_path() / "ddcm_result.txt";
  save_result(stored, path);
  const auto back = load_result(path);
  CHECK(back.scheme == "max-ent");
  CHECK(back.converged == r.converged);
  CHECK(back.iterations == r.iterations);
  CHECK(back.data_distance == r.data_distance);
  CHECK(back.u == r.u);
  CHECK(back.eta == r.eta);
  CHECK(back.distance_history == r.distance_history);
  CHECK(back.beta_history == r.beta_history);
  REQUIRE(back.states.size() == r.z.size());
  for (std::size_t e = 0; e < back.states.size(); ++e) {
    CHECK(back.states[e].strain == r.z.states[e].strain);
    CHECK(back.states[e].stress == r.z.states[e].stress);
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_result(path), IoError);
}
