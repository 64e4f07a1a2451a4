#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "wpsat/wpsat.hpp"

using namespace wpsat;
using nlohmann::json;

namespace {

Assignment read_planted(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  auto values = json::parse(in).get<std::vector<bool>>();
  if (values.size() != n)
    throw std::runtime_error("planted assignment has " + std::to_string(values.size()) + " values, formula has " +
                             std::to_string(n) + " variables");
  return Assignment(values);
}

json psi_json(const PartialAssignment& psi) {
  json out = json::array();
  for (Var v = 1; v <= psi.num_vars(); ++v) {
    if (psi.assigned(v)) {
      out.push_back(psi[v] == Value::True);
    } else {
      out.push_back(nullptr);
    }
  }
  return out;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Warning Propagation on planted random 3-SAT"};
  app.require_subcommand(1);

  // generate
  std::size_t gen_n = 0;
  double gen_d = -1, gen_p = -1;
  std::uint64_t gen_seed = 0;
  std::string gen_out, gen_planted_out;
  auto* gen = app.add_subcommand("generate", "sample a planted 3-SAT instance");
  gen->add_option("--n", gen_n, "variables")->required();
  auto* opt_d = gen->add_option("--d", gen_d, "density, p = d / n^2");
  auto* opt_p = gen->add_option("--p", gen_p, "clause probability");
  opt_d->excludes(opt_p);
  gen->add_option("--seed", gen_seed)->required();
  gen->add_option("--planted-out", gen_planted_out, "planted assignment as a JSON array of booleans");
  gen->add_option("-o,--output", gen_out, "DIMACS output")->required();

  // wp run
  std::string wp_cnf;
  std::uint64_t wp_seed = 0;
  std::size_t wp_max = 0;
  bool wp_json = false;
  auto* wp = app.add_subcommand("wp", "Warning Propagation");
  wp->require_subcommand(1);
  auto* wp_run = wp->add_subcommand("run", "run WP to convergence or the pass cap");
  wp_run->add_option("cnf", wp_cnf)->required()->check(CLI::ExistingFile);
  wp_run->add_option("--seed", wp_seed)->required();
  wp_run->add_option("--max-passes", wp_max, "0 selects max(100, 20 log2 n)");
  wp_run->add_flag("--json", wp_json);

  // solve
  std::string solve_cnf, solve_planted_path, solve_out;
  std::uint64_t solve_seed = 0;
  auto* solve = app.add_subcommand("solve", "WP, simplify, residual solve, verify");
  solve->add_option("cnf", solve_cnf)->required()->check(CLI::ExistingFile);
  solve->add_option("--seed", solve_seed)->required();
  solve->add_option("--planted", solve_planted_path)->check(CLI::ExistingFile);
  solve->add_option("--assignment-out", solve_out, "defaults to <cnf>.solution.json");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "structural diagnostics");
  analyze->require_subcommand(1);
  std::string comp_cnf, comp_induced, comp_planted;
  auto* comp = analyze->add_subcommand("components", "factor graph components");
  comp->add_option("cnf", comp_cnf)->required()->check(CLI::ExistingFile);
  comp->add_option("--induced-by", comp_induced, "JSON array of variable indices")->check(CLI::ExistingFile);
  comp->add_option("--planted", comp_planted, "fix variables outside the set to their planted values")
      ->check(CLI::ExistingFile);
  std::string core_cnf, core_planted;
  std::uint64_t core_seed = 0;
  double core_d = 0;
  auto* core_cmd = analyze->add_subcommand("core", "stability sets and core for one WP run");
  core_cmd->add_option("cnf", core_cnf)->required()->check(CLI::ExistingFile);
  core_cmd->add_option("--planted", core_planted)->required()->check(CLI::ExistingFile);
  core_cmd->add_option("--seed", core_seed)->required();
  core_cmd->add_option("--d", core_d)->required()->check(CLI::PositiveNumber);

  // cycle-sim
  std::size_t cyc_len = 0, cyc_trials = 0;
  std::uint64_t cyc_seed = 0;
  bool cyc_exact = false;
  auto* cyc = app.add_subcommand("cycle-sim", "free-cycle copying process");
  cyc->add_option("--L", cyc_len)->required()->check(CLI::Range(2, 1 << 20));
  cyc->add_option("--trials", cyc_trials)->required()->check(CLI::PositiveNumber);
  cyc->add_option("--seed", cyc_seed)->required();
  cyc->add_flag("--exact", cyc_exact, "also solve the chain exactly (L <= 10)");

  // experiment
  std::string exp_spec, exp_out;
  auto* exp = app.add_subcommand("experiment", "run a grid of planted instances");
  exp->add_option("--spec", exp_spec, "JSON experiment spec")->required()->check(CLI::ExistingFile);
  exp->add_option("-o,--output", exp_out, "report directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (opt_d->count() + opt_p->count() != 1) throw CLI::ValidationError("exactly one of --d, --p is required");
      GenParams params = opt_d->count() ? GenParams::with_density(gen_n, gen_d, gen_seed)
                                        : GenParams::with_probability(gen_n, gen_p, gen_seed);
      PlantedInstance inst = generate(params);
      write_dimacs_file(gen_out, inst.formula);
      if (!gen_planted_out.empty()) write_json(gen_planted_out, inst.planted.to_vector());
      std::cout << json{{"n", gen_n}, {"p", params.p}, {"clauses", inst.formula.num_clauses()}}.dump() << "\n";
    } else if (wp_run->parsed()) {
      Formula f = read_dimacs_file(wp_cnf);
      WPResult r = run(f, WPConfig{wp_max, wp_seed, false});
      if (wp_json) {
        std::cout << json{{"converged", r.converged},
                          {"passes", r.passes_used},
                          {"assigned_fraction", r.assigned_fraction()},
                          {"psi", psi_json(r.assignment)}}
                         .dump()
                  << "\n";
      } else {
        std::cout << (r.converged ? "converged" : "not converged") << " after " << r.passes_used << " passes, "
                  << r.assignment.num_assigned() << "/" << r.assignment.num_vars() << " variables assigned\n";
      }
    } else if (solve->parsed()) {
      Formula f = read_dimacs_file(solve_cnf);
      PipelineResult r = solve_planted(f, WPConfig{0, solve_seed, false});
      json out = {{"status", r.report.success ? "sat" : std::string(to_string(r.report.failure))},
                  {"passes", r.report.passes},
                  {"converged", r.report.converged},
                  {"assigned_fraction", r.report.assigned_fraction},
                  {"residual_clauses", r.report.residual_clauses},
                  {"residual_components", to_json(r.report.census)},
                  {"assignment_path", nullptr}};
      if (r.report.success) {
        std::string path = solve_out.empty() ? solve_cnf + ".solution.json" : solve_out;
        write_json(path, r.assignment.to_vector());
        out["assignment_path"] = path;
      }
      if (!solve_planted_path.empty()) {
        Assignment phi = read_planted(solve_planted_path, f.num_vars());
        bool agrees = r.wp.assignment.consistent_with(phi);
        out["psi_agrees_with_phi"] = agrees;
        out["psi_equals_phi"] = agrees && r.wp.assignment.num_assigned() == f.num_vars();
      }
      std::cout << out.dump() << "\n";
      return r.report.success ? 0 : 3;
    } else if (comp->parsed()) {
      Formula f = read_dimacs_file(comp_cnf);
      Formula g = f;
      if (!comp_induced.empty()) {
        std::ifstream in(comp_induced);
        auto vars = json::parse(in).get<std::vector<Var>>();
        VarSet u(f.num_vars(), std::span<const Var>(vars));
        if (comp_planted.empty()) {
          g = restrict(f, u);
        } else {
          g = non_core_formula(f, read_planted(comp_planted, f.num_vars()), u.complement()).formula;
        }
      } else if (!comp_planted.empty()) {
        throw CLI::ValidationError("--planted needs --induced-by");
      }
      json out = json::array();
      for (const auto& c : components(FactorGraph(g)))
        out.push_back({{"size", c.variables.size()},
                       {"clauses", c.clauses.size()},
                       {"edges", c.edges},
                       {"class", std::string(to_string(c.kind))}});
      std::cout << out.dump() << "\n";
    } else if (core_cmd->parsed()) {
      PlantedInstance inst;
      inst.formula = read_dimacs_file(core_cnf);
      inst.planted = read_planted(core_planted, inst.formula.num_vars());
      WPResult r = run(inst.formula, WPConfig{0, core_seed, true});
      if (r.history->orders.empty()) throw std::runtime_error("formula has no clauses");
      CoreDiagnostics c = core_diagnostics(inst, r, core_d);
      std::cout << json{{"n", inst.formula.num_vars()},
                        {"d", core_d},
                        {"core_size", static_cast<std::size_t>(std::llround(c.core_fraction *
                                                                            inst.formula.num_vars()))},
                        {"core_fraction", c.core_fraction},
                        {"a1", c.a1},
                        {"a2", c.a2},
                        {"a3", c.a3},
                        {"pruned", c.pruned},
                        {"core_edges", c.after_first_pass.edges},
                        {"correct_after_first_pass", c.after_first_pass.correct},
                        {"correct_at_end", c.at_end.correct},
                        {"core_assignment_matches_planted", c.core_assignment_matches_planted},
                        {"noncore_components", c.noncore_components},
                        {"noncore_largest", c.noncore_largest},
                        {"noncore_multicyclic", c.noncore_multicyclic},
                        {"wp_converged", r.converged},
                        {"wp_passes", r.passes_used}}
                       .dump()
                << "\n";
    } else if (cyc->parsed()) {
      Rng rng(cyc_seed);
      auto st = cycle::simulate(cyc_len, cyc_trials, rng);
      std::optional<cycle::ExactAbsorption> ex;
      if (cyc_exact) ex = cycle::exact_absorption(cyc_len, {1, 2, 3}, 1'000'000, cyc_seed);
      json tails = json::array();
      for (unsigned a : {1U, 2U, 3U}) {
        std::size_t threshold = cycle::tail_threshold(cyc_len, a);
        json row = {{"a", a},
                    {"threshold", threshold},
                    {"empirical", st.fraction_at_least(threshold)},
                    {"bound", cycle::tail_bound(cyc_len, a)}};
        if (ex) {
          row["exact_worst_start"] = ex->tails[a - 1].worst_start;
          row["exact_uniform_start"] = ex->tails[a - 1].uniform_start;
        }
        tails.push_back(row);
      }
      auto mc = cycle::martingale_check(cyc_len, cyc_trials, rng);
      json bins = json::array();
      for (const auto& b : mc.bins)
        bins.push_back({{"k", b.length},
                        {"visits", b.visits},
                        {"mean_drift", b.mean},
                        {"stddev", b.stddev},
                        {"second_moment", b.second_moment},
                        {"tested", b.tested},
                        {"passed", b.passed}});
      json out = {{"L", cyc_len},
                  {"trials", cyc_trials},
                  {"mean_T", st.mean},
                  {"stddev_T", st.stddev},
                  {"median_T", st.quantile(0.5)},
                  {"q99_T", st.quantile(0.99)},
                  {"timeouts", st.timeouts},
                  {"absorbed_at_ones", st.absorbed_at_ones},
                  {"bound_2L2", cycle::expected_time_bound(cyc_len)},
                  {"tail_table", tails},
                  {"martingale_check", {{"passed", mc.passed}, {"min_visits", mc.min_visits}, {"bins", bins}}}};
      if (ex)
        out["exact"] = {{"approximate", ex->approximate},
                        {"uniform_start_mean_T", ex->uniform_expected_time},
                        {"max_mean_T", ex->max_expected_time}};
      std::cout << out.dump() << "\n";
    } else if (exp->parsed()) {
      ExperimentSpec spec = load_experiment_spec(exp_spec);
      ExperimentReport rep = run_experiment_to(spec, exp_out);
      json summary = json::array();
      for (const auto& c : rep.cells)
        summary.push_back({{"n", c.cell.n},
                           {"d", c.cell.d()},
                           {"success_rate", c.summary.success_rate},
                           {"psi_equals_phi_rate", c.summary.psi_equals_phi_rate},
                           {"mean_passes", c.summary.mean_passes}});
      std::cout << json{{"report", (std::filesystem::path(exp_out) / "report.json").string()}, {"cells", summary}}.dump()
                << "\n";
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
