#pragma once

// Experiment orchestration: a grid of (n, density) cells, several seeded
// replicates per cell, the full pipeline per replicate plus optional core
// diagnostics, aggregated into JSON and CSV reports.
//
// Experiment file (JSON):
//   {
//     "master_seed": 1,
//     "seeds": 20,
//     "workers": 2,
//     "max_passes": 0,                    // 0: default cap
//     "diagnostics": ["core"],            // optional
//     "cells": [ {"n": 10000, "d": 25},   // p = d / n^2
//                {"n": 2000, "c_log": 60},// p = c ln n / n^2
//                {"n": 500, "p": 0.001} ]
//   }

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "wpsat/analysis.hpp"
#include "wpsat/dimacs.hpp"
#include "wpsat/factor_graph.hpp"
#include "wpsat/generator.hpp"
#include "wpsat/residual_solver.hpp"
#include "wpsat/wp_engine.hpp"

namespace wpsat {

struct Cell {
  std::size_t n = 0;
  double p = 0;
  /// How the density was given, for reporting: "d", "c_log" or "p".
  std::string density_kind = "p";
  double density_value = 0;

  double d() const { return p * static_cast<double>(n) * static_cast<double>(n); }

  static Cell with_density(std::size_t n, double d) {
    return {n, d / (static_cast<double>(n) * static_cast<double>(n)), "d", d};
  }
  static Cell with_log_coefficient(std::size_t n, double c) {
    double nn = static_cast<double>(n);
    return {n, c * std::log(nn) / (nn * nn), "c_log", c};
  }
  static Cell with_probability(std::size_t n, double p) { return {n, p, "p", p}; }
};

struct ExperimentSpec {
  std::vector<Cell> cells;
  std::size_t seeds = 1;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  std::size_t max_passes = 0;
  bool core_diagnostics = false;

  void validate() const {
    if (cells.empty()) throw std::invalid_argument("experiment grid is empty");
    if (seeds == 0) throw std::invalid_argument("experiment needs at least one seed per cell");
  }
};

inline ExperimentSpec parse_experiment_spec(const nlohmann::json& j) {
  ExperimentSpec spec;
  spec.seeds = j.value("seeds", std::size_t{1});
  spec.master_seed = j.value("master_seed", std::uint64_t{0});
  spec.workers = std::max<std::size_t>(1, j.value("workers", std::size_t{1}));
  spec.max_passes = j.value("max_passes", std::size_t{0});
  for (const auto& diag : j.value("diagnostics", nlohmann::json::array())) {
    std::string name = diag.get<std::string>();
    if (name == "core" || name == "components") {
      spec.core_diagnostics = true;
    } else {
      throw std::invalid_argument("unknown diagnostic '" + name + "'");
    }
  }
  for (const auto& c : j.at("cells")) {
    std::size_t n = c.at("n").get<std::size_t>();
    if (c.contains("d")) {
      spec.cells.push_back(Cell::with_density(n, c["d"].get<double>()));
    } else if (c.contains("c_log")) {
      spec.cells.push_back(Cell::with_log_coefficient(n, c["c_log"].get<double>()));
    } else if (c.contains("p")) {
      spec.cells.push_back(Cell::with_probability(n, c["p"].get<double>()));
    } else {
      throw std::invalid_argument("cell needs one of 'd', 'c_log' or 'p'");
    }
  }
  spec.validate();
  return spec;
}

inline ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_experiment_spec(nlohmann::json::parse(in));
}

struct CoreDiagnostics {
  double core_fraction = 0;
  std::size_t a1 = 0, a2 = 0, a3 = 0, pruned = 0;
  /// Messages on F[H] edges after the first pass / at the end.
  MessageAgreement after_first_pass;
  MessageAgreement at_end;
  /// Non-core factor graph: F simplified by the core's planted values.
  std::size_t noncore_components = 0;
  std::size_t noncore_largest = 0;
  std::size_t noncore_multicyclic = 0;
  /// Clauses with two or more non-core variables.
  std::size_t noncore_dense_clauses = 0;
  bool core_assignment_matches_planted = true;
};

struct RunRecord {
  std::size_t cell = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::size_t clauses = 0;
  PipelineReport pipeline;
  bool psi_equals_phi = false;
  /// Every variable WP assigned has its planted value.
  bool psi_agrees_with_phi = false;
  double generate_seconds = 0;
  std::optional<CoreDiagnostics> core;
};

/// Derived per-replicate seed; cells are reproducible independently.
inline std::uint64_t replicate_seed(std::uint64_t master, std::size_t cell, std::size_t replicate) {
  return derive_seed(master, {cell, replicate});
}

inline CoreDiagnostics core_diagnostics(const PlantedInstance& inst, const WPResult& wp, double d) {
  if (!wp.history || wp.history->orders.empty()) throw std::invalid_argument("core diagnostics need WP history");
  PlantedAnalysis a(inst);
  StabilityParams params(d);
  CoreReport rep = core(a, wp.history->orders.front(), wp.history->initial, params);
  CoreDiagnostics out;
  const double n = static_cast<double>(inst.formula.num_vars());
  out.core_fraction = static_cast<double>(rep.core.size()) / n;
  out.a1 = rep.a1.size();
  out.a2 = rep.a2.size();
  out.a3 = rep.a3.size();
  out.pruned = rep.trace.size();
  out.after_first_pass = core_message_agreement(a, rep.core, wp.history->states.front());
  out.at_end = core_message_agreement(a, rep.core, wp.final_messages);
  for (Var v : rep.core.members())
    if (wp.assignment.assigned(v) && (wp.assignment[v] == Value::True) != inst.planted[v])
      out.core_assignment_matches_planted = false;
  out.noncore_dense_clauses = density_count(inst.formula, rep.core.complement());
  SimplifyResult noncore = non_core_formula(inst.formula, inst.planted, rep.core);
  for (const auto& c : components(FactorGraph(noncore.formula))) {
    ++out.noncore_components;
    out.noncore_largest = std::max(out.noncore_largest, c.variables.size());
    out.noncore_multicyclic += c.kind == ComponentClass::Multicyclic;
  }
  return out;
}

struct ReplicateArtifacts {
  PlantedInstance instance;
  PipelineResult result;
};

inline RunRecord run_replicate(const Cell& cell, std::size_t cell_index, std::size_t replicate,
                               std::uint64_t master_seed, std::size_t max_passes, bool with_core,
                               ReplicateArtifacts* keep = nullptr) {
  using clock = std::chrono::steady_clock;
  RunRecord rec;
  rec.cell = cell_index;
  rec.replicate = replicate;
  rec.seed = replicate_seed(master_seed, cell_index, replicate);

  auto t0 = clock::now();
  PlantedInstance inst = generate(GenParams::with_probability(cell.n, cell.p, rec.seed));
  rec.generate_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  rec.clauses = inst.formula.num_clauses();

  WPConfig config{max_passes, derive_seed(rec.seed, {0x77707770}), with_core};
  PipelineResult res = solve_planted(inst.formula, config);
  rec.pipeline = res.report;

  const PartialAssignment& psi = res.wp.assignment;
  rec.psi_agrees_with_phi = psi.consistent_with(inst.planted);
  rec.psi_equals_phi = rec.psi_agrees_with_phi && psi.num_assigned() == psi.num_vars();
  if (with_core && res.wp.history && !res.wp.history->orders.empty())
    rec.core = core_diagnostics(inst, res.wp, cell.d());
  if (keep) {
    keep->instance = std::move(inst);
    keep->result = std::move(res);
  }
  return rec;
}

struct CellAggregate {
  std::size_t runs = 0;
  std::size_t successes = 0;
  std::size_t converged = 0;
  std::size_t psi_equals_phi = 0;
  std::size_t psi_agrees_with_phi = 0;
  double success_rate = 0;
  double converged_rate = 0;
  double psi_equals_phi_rate = 0;
  double mean_passes = 0;
  std::size_t max_passes = 0;
  double mean_assigned_fraction = 0;
  double min_assigned_fraction = 1;
  double mean_clauses = 0;
  ComponentCensus residual_census;
  std::optional<double> mean_core_fraction;
  std::optional<double> min_core_fraction;
  double mean_generate_seconds = 0, mean_wp_seconds = 0, mean_simplify_seconds = 0, mean_residual_seconds = 0;
};

inline CellAggregate aggregate(const std::vector<RunRecord>& runs) {
  CellAggregate a;
  a.runs = runs.size();
  if (runs.empty()) return a;
  double core_sum = 0;
  std::size_t core_count = 0;
  for (const auto& r : runs) {
    a.successes += r.pipeline.success;
    a.converged += r.pipeline.converged;
    a.psi_equals_phi += r.psi_equals_phi;
    a.psi_agrees_with_phi += r.psi_agrees_with_phi;
    a.mean_passes += static_cast<double>(r.pipeline.passes);
    a.max_passes = std::max(a.max_passes, r.pipeline.passes);
    a.mean_assigned_fraction += r.pipeline.assigned_fraction;
    a.min_assigned_fraction = std::min(a.min_assigned_fraction, r.pipeline.assigned_fraction);
    a.mean_clauses += static_cast<double>(r.clauses);
    a.residual_census.trees += r.pipeline.census.trees;
    a.residual_census.unicyclic += r.pipeline.census.unicyclic;
    a.residual_census.multicyclic += r.pipeline.census.multicyclic;
    a.residual_census.largest = std::max(a.residual_census.largest, r.pipeline.census.largest);
    a.mean_generate_seconds += r.generate_seconds;
    a.mean_wp_seconds += r.pipeline.times.wp_seconds;
    a.mean_simplify_seconds += r.pipeline.times.simplify_seconds;
    a.mean_residual_seconds += r.pipeline.times.residual_seconds;
    if (r.core) {
      core_sum += r.core->core_fraction;
      ++core_count;
      a.min_core_fraction = std::min(a.min_core_fraction.value_or(1.0), r.core->core_fraction);
    }
  }
  const double k = static_cast<double>(runs.size());
  a.success_rate = static_cast<double>(a.successes) / k;
  a.converged_rate = static_cast<double>(a.converged) / k;
  a.psi_equals_phi_rate = static_cast<double>(a.psi_equals_phi) / k;
  a.mean_passes /= k;
  a.mean_assigned_fraction /= k;
  a.mean_clauses /= k;
  a.mean_generate_seconds /= k;
  a.mean_wp_seconds /= k;
  a.mean_simplify_seconds /= k;
  a.mean_residual_seconds /= k;
  if (core_count) a.mean_core_fraction = core_sum / static_cast<double>(core_count);
  return a;
}

struct CellReport {
  Cell cell;
  CellAggregate summary;
  std::vector<RunRecord> runs;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<CellReport> cells;
};

/// Per-run failures are recorded, never thrown. When `failure_dir` is set,
/// each failed run leaves its CNF and planted assignment there.
inline ExperimentReport run_experiment(const ExperimentSpec& spec,
                                       const std::optional<std::filesystem::path>& failure_dir = std::nullopt) {
  spec.validate();
  struct Job {
    std::size_t cell, replicate;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < spec.cells.size(); ++c)
    for (std::size_t r = 0; r < spec.seeds; ++r) jobs.push_back({c, r});

  std::vector<RunRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const Job& job = jobs[k];
      ReplicateArtifacts art;
      records[k] = run_replicate(spec.cells[job.cell], job.cell, job.replicate, spec.master_seed, spec.max_passes,
                                 spec.core_diagnostics, failure_dir ? &art : nullptr);
      if (failure_dir && !records[k].pipeline.success) {
        std::lock_guard lock(io);
        std::filesystem::create_directories(*failure_dir);
        std::string stem = "cell" + std::to_string(job.cell) + "_rep" + std::to_string(job.replicate);
        write_dimacs_file((*failure_dir / (stem + ".cnf")).string(), art.instance.formula);
        std::ofstream planted(*failure_dir / (stem + ".planted.json"));
        planted << nlohmann::json(art.instance.planted.to_vector()).dump() << "\n";
      }
    }
  };
  std::size_t workers = std::min(spec.workers, jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ExperimentReport report{spec, {}};
  for (std::size_t c = 0; c < spec.cells.size(); ++c) {
    CellReport cr{spec.cells[c], {}, {}};
    for (std::size_t k = 0; k < jobs.size(); ++k)
      if (jobs[k].cell == c) cr.runs.push_back(records[k]);
    cr.summary = aggregate(cr.runs);
    report.cells.push_back(std::move(cr));
  }
  return report;
}

inline nlohmann::json to_json(const ComponentCensus& c) {
  return {{"trees", c.trees}, {"unicyclic", c.unicyclic}, {"multicyclic", c.multicyclic}, {"largest", c.largest}};
}

inline nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j = {
      {"replicate", r.replicate},
      {"seed", r.seed},
      {"clauses", r.clauses},
      {"success", r.pipeline.success},
      {"failure", std::string(to_string(r.pipeline.failure))},
      {"converged", r.pipeline.converged},
      {"passes", r.pipeline.passes},
      {"assigned_fraction", r.pipeline.assigned_fraction},
      {"residual_clauses", r.pipeline.residual_clauses},
      {"residual_components", to_json(r.pipeline.census)},
      {"psi_equals_phi", r.psi_equals_phi},
      {"psi_agrees_with_phi", r.psi_agrees_with_phi},
      {"times", {{"generate", r.generate_seconds},
                 {"wp", r.pipeline.times.wp_seconds},
                 {"simplify", r.pipeline.times.simplify_seconds},
                 {"residual", r.pipeline.times.residual_seconds}}},
  };
  if (r.core) {
    const auto& c = *r.core;
    j["core"] = {{"core_fraction", c.core_fraction},
                 {"a1", c.a1},
                 {"a2", c.a2},
                 {"a3", c.a3},
                 {"pruned", c.pruned},
                 {"core_edges", c.after_first_pass.edges},
                 {"correct_after_first_pass", c.after_first_pass.correct},
                 {"correct_at_end", c.at_end.correct},
                 {"noncore_components", c.noncore_components},
                 {"noncore_largest", c.noncore_largest},
                 {"noncore_multicyclic", c.noncore_multicyclic},
                 {"noncore_dense_clauses", c.noncore_dense_clauses},
                 {"core_assignment_matches_planted", c.core_assignment_matches_planted}};
  }
  return j;
}

inline nlohmann::json to_json(const CellAggregate& a) {
  nlohmann::json j = {{"runs", a.runs},
                      {"successes", a.successes},
                      {"success_rate", a.success_rate},
                      {"converged_rate", a.converged_rate},
                      {"psi_equals_phi_rate", a.psi_equals_phi_rate},
                      {"mean_passes", a.mean_passes},
                      {"max_passes", a.max_passes},
                      {"mean_assigned_fraction", a.mean_assigned_fraction},
                      {"min_assigned_fraction", a.min_assigned_fraction},
                      {"mean_clauses", a.mean_clauses},
                      {"residual_components", to_json(a.residual_census)},
                      {"mean_seconds", {{"generate", a.mean_generate_seconds},
                                        {"wp", a.mean_wp_seconds},
                                        {"simplify", a.mean_simplify_seconds},
                                        {"residual", a.mean_residual_seconds}}}};
  if (a.mean_core_fraction) {
    j["mean_core_fraction"] = *a.mean_core_fraction;
    j["min_core_fraction"] = *a.min_core_fraction;
  }
  return j;
}

inline nlohmann::json to_json(const ExperimentReport& rep) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : rep.cells) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : c.runs) runs.push_back(to_json(r));
    cells.push_back({{"n", c.cell.n},
                     {"p", c.cell.p},
                     {"d", c.cell.d()},
                     {"density_kind", c.cell.density_kind},
                     {"density_value", c.cell.density_value},
                     {"summary", to_json(c.summary)},
                     {"runs", runs}});
  }
  return {{"master_seed", rep.spec.master_seed},
          {"seeds", rep.spec.seeds},
          {"core_diagnostics", rep.spec.core_diagnostics},
          {"cells", cells}};
}

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "cell",           "n",          "p",           "d",
      "runs",           "successes",  "success_rate", "converged_rate",
      "psi_equals_phi_rate", "mean_passes", "max_passes", "mean_assigned_fraction",
      "min_assigned_fraction", "mean_clauses", "residual_trees", "residual_unicyclic",
      "residual_multicyclic", "residual_largest", "mean_core_fraction", "mean_generate_seconds",
      "mean_wp_seconds", "mean_simplify_seconds", "mean_residual_seconds"};
  return cols;
}

inline std::string to_csv(const ExperimentReport& rep) {
  auto num = [](double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  std::ostringstream out;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (std::size_t c = 0; c < rep.cells.size(); ++c) {
    const auto& cell = rep.cells[c].cell;
    const auto& a = rep.cells[c].summary;
    std::vector<std::string> row = {std::to_string(c),
                                    std::to_string(cell.n),
                                    num(cell.p),
                                    num(cell.d()),
                                    std::to_string(a.runs),
                                    std::to_string(a.successes),
                                    num(a.success_rate),
                                    num(a.converged_rate),
                                    num(a.psi_equals_phi_rate),
                                    num(a.mean_passes),
                                    std::to_string(a.max_passes),
                                    num(a.mean_assigned_fraction),
                                    num(a.min_assigned_fraction),
                                    num(a.mean_clauses),
                                    std::to_string(a.residual_census.trees),
                                    std::to_string(a.residual_census.unicyclic),
                                    std::to_string(a.residual_census.multicyclic),
                                    std::to_string(a.residual_census.largest),
                                    a.mean_core_fraction ? num(*a.mean_core_fraction) : "",
                                    num(a.mean_generate_seconds),
                                    num(a.mean_wp_seconds),
                                    num(a.mean_simplify_seconds),
                                    num(a.mean_residual_seconds)};
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

/// Writes report.json and report.csv into `dir`; failed runs go to dir/failures.
inline ExperimentReport run_experiment_to(const ExperimentSpec& spec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  ExperimentReport rep = run_experiment(spec, dir / "failures");
  std::ofstream(dir / "report.json") << to_json(rep).dump(2) << "\n";
  std::ofstream(dir / "report.csv") << to_csv(rep);
  return rep;
}

}  // namespace wpsat
