#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "broja2pid/cli.hpp"
#include "broja2pid/solver.hpp"

namespace {

void add_solver_flags(CLI::App* app, broja2pid::SolverParams& p, int& mode,
                      std::string& cone_solver) {
  app->add_option("--feastol", p.feastol, "primal/dual feasibility tolerance");
  app->add_option("--abstol", p.abstol, "absolute gap tolerance");
  app->add_option("--reltol", p.reltol, "relative gap tolerance");
  app->add_option("--feastol-inacc", p.feastol_inacc, "feastol for inaccurate status");
  app->add_option("--abstol-inacc", p.abstol_inacc, "abstol for inaccurate status");
  app->add_option("--reltol-inacc", p.reltol_inacc, "reltol for inaccurate status");
  app->add_option("--max-iter", p.max_iter, "outer iteration budget");
  app->add_option("--output", mode, "printing mode")->check(CLI::Range(0, 2));
  app->add_option("--cone-solver", cone_solver, "cone solver")
      ->check(CLI::IsMember({std::string(broja2pid::kSolverName)}));
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = broja2pid::cli;
  CLI::App app{"Bivariate partial information decomposition"};
  app.require_subcommand(1);

  broja2pid::SolverParams params;
  int mode = 0;
  std::string cone_solver = broja2pid::kSolverName;

  std::string input;
  auto* pid = app.add_subcommand("pid", "decompose one distribution file");
  pid->add_option("input", input, "JSON records or `x y z p` table")->required();
  add_solver_flags(pid, params, mode, cone_solver);

  auto* gates = app.add_subcommand("gates", "run the gate battery");
  add_solver_flags(gates, params, mode, cone_solver);

  int m = 0, n = 0;
  auto* copy = app.add_subcommand("copy", "COPY(m, n) gate");
  copy->add_option("m", m)->required();
  copy->add_option("n", n)->required();
  add_solver_flags(copy, params, mode, cone_solver);

  int nx = 0, ny = 0, nz = 0, count = 0, jobs = 1;
  std::uint64_t seed = 0;
  auto* rnd = app.add_subcommand("randompdf", "sweep over random distributions");
  rnd->add_option("nx", nx)->required();
  rnd->add_option("ny", ny)->required();
  rnd->add_option("nz", nz)->required();
  rnd->add_option("count", count)->required();
  auto* seed_opt = rnd->add_option("--seed", seed, "first seed (default: BROJA2PID_SEED)");
  rnd->add_option("--jobs", jobs, "worker threads");
  add_solver_flags(rnd, params, mode, cone_solver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (pid->parsed()) return cli::cmd_pid(input, params, mode, std::cout, std::cerr);
    if (gates->parsed()) return cli::cmd_gates(params, mode, std::cout, std::cerr);
    if (copy->parsed()) return cli::cmd_copy(m, n, params, mode, std::cout, std::cerr);
    if (rnd->parsed()) {
      if (seed_opt->count() == 0) seed = cli::default_seed();
      return cli::cmd_randompdf(nx, ny, nz, count, seed, params, mode, jobs, std::cout,
                                std::cerr);
    }
  } catch (const broja2pid::Exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
