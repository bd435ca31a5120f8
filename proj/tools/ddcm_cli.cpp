#include "ddcm/benchmarks.hpp"
#include "ddcm/dd_solver.hpp"
#include "ddcm/errors.hpp"
#include "ddcm/material_data.hpp"
#include "ddcm/problem_io.hpp"
#include "ddcm/result_io.hpp"
#include "ddcm/studies.hpp"
#include "ddcm/tensor_voting.hpp"
#include "ddcm/text_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace ddcm;

namespace {

struct LawOptions {
  std::string law = "truss";
  double youngs = 100000.0;
};

ConstitutiveLaw make_law(const LawOptions& o) {
  if (o.law == "truss") return truss_reference_law();
  if (o.law == "plate") return plate_reference_law();
  if (o.law == "linear") return linear_law(Eigen::MatrixXd::Constant(1, 1, o.youngs), "linear");
  throw InvalidArgument("unknown law '" + o.law + "'");
}

MetricTensor make_metric(const LawOptions& o) {
  if (o.law == "truss") return MetricTensor::scalar(TrussLawParams{}.youngs_modulus);
  if (o.law == "plate") return MetricTensor::plane_strain(PlateSpec{}.youngs_modulus, PlateSpec{}.poisson);
  return MetricTensor::scalar(o.youngs);
}

struct BenchmarkOptions {
  std::string benchmark = "truss";
  int levels = 8;
  int bays = 2;
  int density = 7;
  std::string geometry;
};

BenchmarkSetup make_setup(const BenchmarkOptions& o) {
  BenchmarkSetup s;
  if (o.benchmark == "truss") {
    s.benchmark = Benchmark::Truss;
  } else if (o.benchmark == "plate") {
    s.benchmark = Benchmark::Plate;
  } else {
    throw InvalidArgument("unknown benchmark '" + o.benchmark + "'");
  }
  s.truss.levels = o.levels;
  s.truss.bays = o.bays;
  if (!o.geometry.empty()) s.truss.geometry_file = o.geometry;
  s.plate.density = o.density;
  return s;
}

void add_benchmark_options(CLI::App* cmd, BenchmarkOptions& o) {
  cmd->add_option("--benchmark", o.benchmark, "truss or plate")->check(CLI::IsMember({"truss", "plate"}));
  cmd->add_option("--levels", o.levels, "lattice tower storeys")->check(CLI::PositiveNumber);
  cmd->add_option("--bays", o.bays, "lattice tower bays per side")->check(CLI::PositiveNumber);
  cmd->add_option("--density", o.density, "plate mesh density (elements radially)")->check(CLI::PositiveNumber);
  cmd->add_option("--geometry", o.geometry, "truss geometry file replacing the generated tower");
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
  std::vector<T> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = std::min(s.find(',', start), s.size());
    const std::string item = s.substr(start, end - start);
    if (item.empty()) throw InvalidArgument("empty item in list '" + s + "'");
    if constexpr (std::is_same_v<T, std::string>) {
      out.push_back(item);
    } else {
      text::TokenReader r(item, "list");
      if constexpr (std::is_floating_point_v<T>)
        out.push_back(r.next_double());
      else
        out.push_back(static_cast<T>(r.next_count()));
      if (!r.at_end()) throw InvalidArgument("bad list item '" + item + "'");
    }
    start = end + 1;
  }
  return out;
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-")
    std::cout << content;
  else
    text::write_file(path, content);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven solvers for truss and plane-strain problems, with tensor-voting tangent learning"};
  app.set_config("--config", "", "key = value file mirroring the command-line flags");
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "sample a material data set from a reference law");
  LawOptions gen_law;
  std::size_t gen_count = 400;
  std::string gen_sampling = "uniform";
  std::optional<double> gen_bound;
  double gen_noise = 0.0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--law", gen_law.law, "truss, plate or linear")->check(CLI::IsMember({"truss", "plate", "linear"}));
  gen->add_option("--youngs", gen_law.youngs, "modulus of the linear law (MPa)")->check(CLI::PositiveNumber);
  gen->add_option("--count", gen_count, "number of points")->check(CLI::PositiveNumber);
  gen->add_option("--sampling", gen_sampling, "uniform, normal or grid")
      ->check(CLI::IsMember({"uniform", "normal", "grid"}));
  gen->add_option("--strain-bound", gen_bound,
                  "uniform/grid half-width or normal standard deviation (default 0.025 truss, 0.005 plate)");
  gen->add_option("--noise", gen_noise, "noise stddev as a fraction of the max |component|")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--output", gen_out, "data set file")->required();

  // vote
  auto* vote = app.add_subcommand("vote", "learn tangent frames by ball-tensor voting");
  VotingConfig vote_cfg;
  std::optional<int> vote_dim;
  std::string vote_in, vote_out;
  vote->add_option("--sigma", vote_cfg.sigma,
                   "vote decay length in learning-space units; for a scalar modulus c0 the equivalent strain "
                   "radius is sigma / sqrt(2 c0)")
      ->check(CLI::PositiveNumber);
  vote->add_option("--k-neighbors", vote_cfg.k_neighbors, "voters per point")->check(CLI::PositiveNumber);
  vote->add_option("--manifold-dim", vote_dim, "tangent-space dimension (estimated when omitted)")
      ->check(CLI::PositiveNumber);
  vote->add_option("--threads", vote_cfg.threads, "worker threads");
  vote->add_option("--input", vote_in, "data set file")->required();
  vote->add_option("--output", vote_out, "voted data set file")->required();

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "run a data-driven solver");
  SolverConfig solve_cfg;
  std::string solve_scheme = "min-dist";
  std::string solve_problem, solve_data, solve_out;
  solve_cmd->add_option("--scheme", solve_scheme, "min-dist or max-ent")->check(CLI::IsMember({"min-dist", "max-ent"}));
  solve_cmd->add_flag("--ten-vote", solve_cfg.ten_vote, "project onto voted tangent spaces");
  solve_cmd->add_option("--beta0", solve_cfg.beta0, "initial Pareto weight")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--lambda", solve_cfg.lambda_anneal, "annealing rate in [0, 1]")->check(CLI::Range(0.0, 1.0));
  solve_cmd->add_option("--beta-end", solve_cfg.beta_end, "final Pareto weight")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--tol", solve_cfg.distance_tolerance, "distance tolerance")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--stall-tol", solve_cfg.stall_tolerance, "max-ent relative stall tolerance")
      ->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--tangent-cap", solve_cfg.tangent_cap, "max tangent excursion (learning space)")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--max-iter", solve_cfg.max_iterations, "iteration limit")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--seed", solve_cfg.rng_seed, "seed of the random initial assignment");
  solve_cmd->add_option("--problem", solve_problem, "problem file")->required();
  solve_cmd->add_option("--data", solve_data, "data set file shared by all material points")->required();
  solve_cmd->add_option("--out", solve_out, "result file")->required();

  // reference
  auto* ref = app.add_subcommand("reference", "build a benchmark problem and its Newton reference solution");
  BenchmarkOptions ref_bench;
  std::string ref_problem, ref_write, ref_out;
  LawOptions ref_law;
  bool ref_law_set = false;
  add_benchmark_options(ref, ref_bench);
  ref->add_option("--problem", ref_problem, "existing problem file (instead of --benchmark)");
  ref->add_option("--law", ref_law.law, "truss, plate or linear (default: the benchmark's law)")
      ->check(CLI::IsMember({"truss", "plate", "linear"}))
      ->each([&](const std::string&) { ref_law_set = true; });
  ref->add_option("--youngs", ref_law.youngs, "modulus of the linear law (MPa)")->check(CLI::PositiveNumber);
  ref->add_option("--write-problem", ref_write, "save the problem file");
  ref->add_option("--out", ref_out, "result file for the reference solution");

  // study-convergence
  auto* conv = app.add_subcommand("study-convergence", "error against the Newton reference versus data set size");
  BenchmarkOptions conv_bench;
  std::string conv_schemes = "min-dist,min-dist/ten-vote";
  std::string conv_sizes = "100,400,1600,6400";
  ConvergenceStudySpec conv_spec;
  std::optional<double> conv_sigma;
  std::string conv_out, conv_summary;
  bool conv_no_wall = false;
  add_benchmark_options(conv, conv_bench);
  conv->add_option("--schemes", conv_schemes, "comma list of min-dist, max-ent, min-dist/ten-vote, max-ent/ten-vote");
  conv->add_option("--sizes", conv_sizes, "comma list of strictly increasing data set sizes");
  conv->add_option("--samples", conv_spec.samples_per_cell, "data sets per size")->check(CLI::PositiveNumber);
  conv->add_option("--noise", conv_spec.noise, "noise fraction")->check(CLI::NonNegativeNumber);
  conv->add_option("--seed", conv_spec.seed, "master seed");
  conv->add_option("--threads", conv_spec.threads, "worker threads");
  conv->add_option("--sigma", conv_sigma, "fixed vote sigma (default 25/n)")->check(CLI::PositiveNumber);
  conv->add_option("--k-neighbors", conv_spec.voting.k_neighbors, "voters per point")->check(CLI::PositiveNumber);
  conv->add_option("--beta0", conv_spec.solver.beta0, "initial Pareto weight")->check(CLI::PositiveNumber);
  conv->add_option("--lambda", conv_spec.solver.lambda_anneal, "annealing rate")->check(CLI::Range(0.0, 1.0));
  conv->add_option("--beta-end", conv_spec.solver.beta_end, "final Pareto weight")->check(CLI::PositiveNumber);
  conv->add_option("--stall-tol", conv_spec.solver.stall_tolerance, "max-ent relative stall tolerance")
      ->check(CLI::NonNegativeNumber);
  conv->add_option("--max-iter", conv_spec.solver.max_iterations, "iteration limit")->check(CLI::PositiveNumber);
  conv->add_flag("--no-wall-time", conv_no_wall, "omit the wall_time column");
  conv->add_option("--out", conv_out, "per-run CSV (default stdout)");
  conv->add_option("--summary-out", conv_summary, "per-size summary CSV");

  // study-voting
  auto* vstudy = app.add_subcommand("study-voting", "angular error of learned tangents on the truss law");
  VotingStudySpec vspec;
  std::string v_sizes = "100,400,1600", v_sigmas = "0.0625,0.25,1", v_noise = "0";
  std::string v_out, v_summary;
  vstudy->add_option("--sizes", v_sizes, "comma list of strictly increasing data set sizes");
  vstudy->add_option("--sigmas", v_sigmas, "comma list of vote sigmas");
  vstudy->add_option("--noise", v_noise, "comma list of noise fractions");
  vstudy->add_option("--samples", vspec.samples_per_cell, "data sets per cell")->check(CLI::PositiveNumber);
  vstudy->add_option("--k-neighbors", vspec.voting.k_neighbors, "voters per point")->check(CLI::PositiveNumber);
  vstudy->add_option("--reference-samples", vspec.reference_samples, "dense samples of the reference curve")
      ->check(CLI::PositiveNumber);
  vstudy->add_option("--seed", vspec.seed, "master seed");
  vstudy->add_option("--threads", vspec.threads, "worker threads");
  vstudy->add_option("--out", v_out, "per-run CSV (default stdout)");
  vstudy->add_option("--summary-out", v_summary, "per-cell median CSV");

  // coverage
  auto* cov = app.add_subcommand("coverage", "remaining local distance per material point of a solved state");
  std::string cov_problem, cov_data, cov_result, cov_out;
  cov->add_option("--problem", cov_problem, "problem file")->required();
  cov->add_option("--data", cov_data, "data set file")->required();
  cov->add_option("--result", cov_result, "result file written by solve")->required();
  cov->add_option("--out", cov_out, "CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) {
      DataGenSpec spec{make_law(gen_law), make_metric(gen_law)};
      spec.count = gen_count;
      spec.sampling = gen_sampling == "uniform" ? StrainSampling::Uniform
                      : gen_sampling == "normal" ? StrainSampling::Normal
                                                 : StrainSampling::Grid;
      spec.strain_bound = gen_bound.value_or(gen_law.law == "plate" ? 0.005 : 0.025);
      spec.noise_stddev_fraction = gen_noise;
      spec.rng_seed = gen_seed;
      save_dataset(sample_dataset(spec), gen_out);
      std::cout << "wrote " << gen_count << " points to " << gen_out << '\n';
    } else if (vote->parsed()) {
      vote_cfg.manifold_dim = vote_dim;
      VotingStats stats;
      const auto voted = vote_dataset(load_dataset(vote_in), vote_cfg, &stats);
      save_dataset(voted, vote_out);
      std::cout << "voted " << voted.size() << " points; skipped duplicates " << stats.skipped_duplicates
                << ", degenerate frames " << stats.degenerate_frames << ", rescaled " << stats.rescaled_points
                << '\n';
    } else if (solve_cmd->parsed()) {
      solve_cfg.scheme = solve_scheme == "max-ent" ? Scheme::MaxEnt : Scheme::MinDist;
      const Problem problem = assemble_problem(load_model(solve_problem));
      const DataSets ds = share_dataset(load_dataset(solve_data), problem.size());
      const auto start = std::chrono::steady_clock::now();
      const SolveResult r = solve(problem, ds, solve_cfg);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const std::string name = SchemeVariant{solve_cfg.scheme, solve_cfg.ten_vote}.name();
      save_result(to_stored(r, name), solve_out);
      std::cout << name << ": " << r.iterations << " iterations, stop " << r.stop_reason
                << ", data distance " << text::format_double(r.data_distance) << ", " << secs << " s\n";
    } else if (ref->parsed()) {
      Model model;
      const bool from_file = !ref_problem.empty();
      if (from_file) {
        model = load_model(ref_problem);
      } else {
        const auto setup = make_setup(ref_bench);
        model = setup.benchmark == Benchmark::Truss ? build_truss_model(setup.truss) : build_plate_model(setup.plate);
      }
      if (!ref_write.empty()) save_model(model, ref_write);
      if (!ref_out.empty()) {
        if (!ref_law_set && !from_file) ref_law.law = ref_bench.benchmark;
        const Problem problem = assemble_problem(model);
        const NewtonResult nr = newton_reference_solve(problem, make_law(ref_law));
        StoredResult sr;
        sr.scheme = "newton";
        sr.converged = true;
        sr.iterations = nr.iterations;
        sr.u = nr.u;
        sr.eta = Vector::Zero(nr.u.size());
        sr.states = nr.z.states;
        sr.distance_history = nr.residual_history;
        save_result(sr, ref_out);
        std::cout << "Newton reference: " << nr.iterations << " iterations, " << problem.size()
                  << " material points\n";
      }
      if (ref_write.empty() && ref_out.empty()) throw InvalidArgument("nothing to do: give --write-problem or --out");
    } else if (conv->parsed()) {
      conv_spec.setup = make_setup(conv_bench);
      conv_spec.schemes.clear();
      for (const auto& s : parse_list<std::string>(conv_schemes)) conv_spec.schemes.push_back(SchemeVariant::parse(s));
      conv_spec.set_sizes = parse_list<std::size_t>(conv_sizes);
      if (conv_sigma) {
        conv_spec.sigma_rule.reset();
        conv_spec.voting.sigma = *conv_sigma;
      }
      const auto report = run_convergence_study(conv_spec);
      write_or_print(conv_out, convergence_csv(report, !conv_no_wall));
      if (!conv_summary.empty()) text::write_file(conv_summary, convergence_summary_csv(report));
      (conv_out.empty() || conv_out == "-" ? std::cerr : std::cout) << convergence_table(report);
    } else if (vstudy->parsed()) {
      vspec.set_sizes = parse_list<std::size_t>(v_sizes);
      vspec.sigmas = parse_list<double>(v_sigmas);
      vspec.noise_levels = parse_list<double>(v_noise);
      const auto report = run_voting_study(vspec);
      write_or_print(v_out, voting_csv(report));
      if (!v_summary.empty()) text::write_file(v_summary, voting_summary_csv(report));
    } else if (cov->parsed()) {
      const Problem problem = assemble_problem(load_model(cov_problem));
      const DataSets ds = share_dataset(load_dataset(cov_data), problem.size());
      const StoredResult r = load_result(cov_result);
      write_or_print(cov_out, coverage_csv(run_coverage_report(problem, r.states, ds)));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
