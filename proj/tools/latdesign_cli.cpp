// latdesign: command-line front end for the lattice design library.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "latdesign/errors.hpp"
#include "latdesign/fold_oracle.hpp"
#include "latdesign/lattice.hpp"
#include "latdesign/metrics.hpp"
#include "latdesign/parallel.hpp"
#include "latdesign/pipeline.hpp"
#include "latdesign/qubo.hpp"
#include "latdesign/refine.hpp"
#include "latdesign/solvers.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace latdesign;

namespace {

EnergyMatrix resolve_matrix(const std::string& path, int alphabet_size) {
  if (path.empty()) return ground_truth_matrix(alphabet_size);
  const auto load = read_energy_matrix_file(path);
  if (load.warned()) {
    std::cerr << "warning: matrix " << path << " was asymmetric by up to " << load.max_asymmetry
              << "; symmetrized\n";
  }
  return load.matrix;
}

Conformation read_target(const std::string& path) {
  const auto confs = read_conformations_file(path);
  if (confs.empty()) throw IoError("no conformation in " + path);
  return confs.front();
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice protein design: enumeration, folding, QUBO export, annealing and refinement"};
  app.require_subcommand(1);

  // enumerate
  int enum_side = 4;
  bool enum_reversal = false;
  std::string enum_out;
  auto* enumerate_cmd = app.add_subcommand("enumerate", "List compact conformations of an L x L lattice");
  enumerate_cmd->add_option("--side", enum_side, "Lattice side L")->required();
  enumerate_cmd->add_flag("--mod-reversal", enum_reversal, "Also identify chain reversals");
  enumerate_cmd->add_option("--out", enum_out, "Output file (default stdout)");

  // fold
  int fold_side = 4;
  std::string fold_sequence, fold_matrix;
  int fold_alphabet = 0;
  double fold_beta = 3.0, fold_p = 0.8;
  std::size_t fold_top = 5;
  auto* fold_cmd = app.add_subcommand("fold", "Fold a sequence over the compact ensemble");
  fold_cmd->add_option("--side", fold_side, "Lattice side L")->required();
  fold_cmd->add_option("--sequence", fold_sequence, "Residue labels, 1-based, comma separated")->required();
  fold_cmd->add_option("--matrix", fold_matrix, "Energy matrix file (default: built-in for D)");
  fold_cmd->add_option("--alphabet", fold_alphabet, "Alphabet size D (default: largest label)");
  fold_cmd->add_option("--beta", fold_beta, "Inverse temperature");
  fold_cmd->add_option("--p-fold", fold_p, "Fold probability threshold");
  fold_cmd->add_option("--top", fold_top, "Spectrum entries to print");

  // census
  int census_side = 4;
  std::string census_comp = "5,5,6", census_matrix, census_out;
  double census_beta = 3.0, census_p = 0.8;
  std::uint64_t census_cap = 10'000'000;
  auto* census_cmd = app.add_subcommand("census", "Designability of every structure for a composition");
  census_cmd->add_option("--side", census_side, "Lattice side L");
  census_cmd->add_option("--composition", census_comp, "Counts per residue type");
  census_cmd->add_option("--matrix", census_matrix, "Energy matrix file (default: built-in for D)");
  census_cmd->add_option("--beta", census_beta, "Inverse temperature");
  census_cmd->add_option("--p-fold", census_p, "Fold probability threshold");
  census_cmd->add_option("--cap", census_cap, "Maximum number of sequences");
  census_cmd->add_option("--out", census_out, "CSV output (default stdout)");

  // export-qubo
  std::string q_target, q_matrix, q_comp = "5,5,6", q_out;
  QuboWeights q_weights;
  std::size_t q_samples = 2000;
  std::uint64_t q_seed = 7;
  auto* qubo_cmd = app.add_subcommand("export-qubo", "Write the QUBO for a target conformation");
  qubo_cmd->add_option("--target", q_target, "Target conformation file")->required();
  qubo_cmd->add_option("--matrix", q_matrix, "Energy matrix file (default: built-in for D)");
  qubo_cmd->add_option("--composition", q_comp, "Counts per residue type");
  qubo_cmd->add_option("--A1", q_weights.a1, "Composition penalty");
  qubo_cmd->add_option("--A2", q_weights.a2, "Double-occupancy penalty");
  qubo_cmd->add_option("--B", q_weights.b, "Contact term weight");
  qubo_cmd->add_option("--reference-samples", q_samples, "Backbite samples for <C> above 6x6");
  qubo_cmd->add_option("--seed", q_seed, "Seed for reference sampling");
  qubo_cmd->add_option("--out", q_out, "Output path")->required();

  // solve
  std::string s_target, s_matrix, s_comp = "5,5,6", s_solver = "seq-sa", s_json, s_csv;
  std::uint64_t s_budget = 0, s_seed = 1, s_steps = 10'000;
  std::size_t s_restarts = 20, s_topk = 30, s_samples = 2000;
  double s_tmax = 100.0, s_tmin = 1e-4;
  QuboWeights s_weights;
  auto* solve_cmd = app.add_subcommand("solve", "Minimize G(S) for a target conformation");
  solve_cmd->add_option("--target", s_target, "Target conformation file")->required();
  solve_cmd->add_option("--matrix", s_matrix, "Energy matrix file (default: built-in for D)");
  solve_cmd->add_option("--composition", s_comp, "Counts per residue type");
  solve_cmd->add_option("--solver", s_solver, "seq-sa, qubo-sa or exhaustive")
      ->check(CLI::IsMember({"seq-sa", "qubo-sa", "exhaustive"}));
  solve_cmd->add_option("--time-budget-ms", s_budget, "Run restarts until this budget is spent (0: use --restarts)");
  solve_cmd->add_option("--restarts", s_restarts, "Number of restarts");
  solve_cmd->add_option("--steps", s_steps, "Annealing steps per restart");
  solve_cmd->add_option("--t-max", s_tmax, "Initial temperature");
  solve_cmd->add_option("--t-min", s_tmin, "Final temperature");
  solve_cmd->add_option("--seed", s_seed, "Base seed");
  solve_cmd->add_option("--top-k", s_topk, "Candidates to report");
  solve_cmd->add_option("--A1", s_weights.a1, "Composition penalty (qubo-sa)");
  solve_cmd->add_option("--A2", s_weights.a2, "Double-occupancy penalty (qubo-sa)");
  solve_cmd->add_option("--B", s_weights.b, "Contact weight (qubo-sa)");
  solve_cmd->add_option("--reference-samples", s_samples, "Backbite samples for <C> above 6x6");
  solve_cmd->add_option("--json", s_json, "SolverRun array output (default stdout)");
  solve_cmd->add_option("--csv", s_csv, "Best value per run, for histograms");

  // roc
  std::string r_mode = "ground-truth", r_matrix, r_truth, r_comp = "5,5,6", r_out = ".";
  int r_side = 4;
  long r_target = -1;
  double r_beta = 3.0, r_p = 0.8;
  auto* roc_cmd = app.add_subcommand("roc", "ROC of the G(S) ranking against the designing set");
  roc_cmd->add_option("--mode", r_mode, "ground-truth or learned")
      ->check(CLI::IsMember({"ground-truth", "learned"}));
  roc_cmd->add_option("--side", r_side, "Lattice side L");
  roc_cmd->add_option("--composition", r_comp, "Counts per residue type");
  roc_cmd->add_option("--target", r_target, "Target index (default: most designable)");
  roc_cmd->add_option("--truth", r_truth, "Ground-truth matrix (default: built-in for D)");
  roc_cmd->add_option("--matrix", r_matrix, "Scoring matrix for --mode learned");
  roc_cmd->add_option("--beta", r_beta, "Inverse temperature");
  roc_cmd->add_option("--p-fold", r_p, "Fold probability threshold");
  roc_cmd->add_option("--out", r_out, "Directory for roc.csv and summary.json");

  // design
  std::string d_config, d_out, d_report;
  bool d_fresh = false;
  auto* design_cmd = app.add_subcommand("design", "Run the iterative design loop");
  design_cmd->add_option("--config", d_config, "JSON design config")->required();
  design_cmd->add_option("--out", d_out, "Checkpoint directory parent");
  design_cmd->add_flag("--fresh", d_fresh, "Ignore existing checkpoints");
  design_cmd->add_option("--report", d_report, "Report output (default stdout)");

  // benchmark
  BenchmarkConfig b_cfg;
  std::string b_comp = "27,27,27", b_out = "bench";
  auto* bench_cmd = app.add_subcommand("benchmark", "Equal-time seq-SA vs QUBO-SA histograms");
  bench_cmd->add_option("--target", b_cfg.target_file, "Target conformation file")->required();
  bench_cmd->add_option("--composition", b_comp, "Counts per residue type");
  bench_cmd->add_option("--matrix", b_cfg.truth_matrix, "Energy matrix file (default: built-in for D)");
  bench_cmd->add_option("--budget-ms", b_cfg.budget_ms, "Wall time per solver");
  bench_cmd->add_option("--samples", b_cfg.samples, "Samples per solver");
  bench_cmd->add_option("--bins", b_cfg.bins, "Histogram bins");
  bench_cmd->add_option("--reference-samples", b_cfg.reference_samples, "Backbite samples for <C>");
  bench_cmd->add_option("--seed", b_cfg.seed, "Base seed");
  bench_cmd->add_option("--out", b_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*enumerate_cmd) {
      EnumerationOptions opts;
      opts.symmetry = enum_reversal ? Symmetry::point_and_reversal : Symmetry::point;
      const auto confs = enumerate_compact_conformations(enum_side, opts);
      if (enum_out.empty()) {
        write_conformations(std::cout, confs);
      } else {
        write_conformations_file(enum_out, confs);
      }
      std::cerr << confs.size() << " conformations\n";
    } else if (*fold_cmd) {
      const auto seq = Sequence::parse(fold_sequence);
      int d = fold_alphabet;
      if (d == 0) {
        for (auto t : seq.types()) d = std::max(d, t + 1);
      }
      const auto e = resolve_matrix(fold_matrix, d);
      const auto ensemble = CompactEnsemble::enumerate(fold_side);
      const auto fr = fold(seq, ensemble, e, fold_beta, fold_p);
      json out = {{"native", fr.native()},
                  {"native_conformation", ""},
                  {"ground_states", fr.ground_states},
                  {"p_native", fr.p_native},
                  {"foldable", fr.foldable}};
      std::ostringstream conf;
      write_conformations(conf, std::span<const Conformation>(&ensemble.conformation(fr.native()), 1));
      std::string text = conf.str();
      if (!text.empty() && text.back() == '\n') text.pop_back();
      out["native_conformation"] = text;
      json spectrum = json::array();
      for (std::size_t k = 0; k < std::min(fold_top, fr.spectrum.size()); ++k) {
        spectrum.push_back({{"index", fr.spectrum[k].index}, {"energy", fr.spectrum[k].energy}});
      }
      out["spectrum"] = spectrum;
      std::cout << out.dump(2) << '\n';
    } else if (*census_cmd) {
      const auto comp = Composition::parse(census_comp);
      const auto e = resolve_matrix(census_matrix, comp.alphabet_size());
      const auto ensemble = CompactEnsemble::enumerate(census_side);
      CensusOptions opts;
      opts.max_sequences = census_cap;
      opts.keep_sequences = false;
      const auto result = designability_census(ensemble, comp, e, census_beta, census_p, opts);
      std::ostringstream csv;
      csv << "structure,unique_ground_state,designing\n";
      for (const auto& r : result.records) {
        csv << r.structure << ',' << r.unique_ground_state << ',' << r.designing << '\n';
      }
      write_or_print(census_out, csv.str());
      std::cerr << result.total_sequences << " sequences; most designable structure "
                << result.most_designable() << " ("
                << result.records[result.most_designable()].designing << " designing)\n";
    } else if (*qubo_cmd) {
      const auto comp = Composition::parse(q_comp);
      const auto e = resolve_matrix(q_matrix, comp.alphabet_size());
      const auto target = read_target(q_target);
      const DeltaContactMap dc(ContactMap(target), reference_average(target.side(), q_samples, q_seed));
      if (auto warning = dominance_warning(dc, e, q_weights)) std::cerr << "warning: " << *warning << '\n';
      const auto problem = encode(dc, e, comp, q_weights);
      export_qubo(problem, q_out);
      std::cerr << problem.num_vars() << " variables, " << problem.terms().size() << " terms\n";
    } else if (*solve_cmd) {
      const auto comp = Composition::parse(s_comp);
      const auto e = resolve_matrix(s_matrix, comp.alphabet_size());
      const auto target = read_target(s_target);
      const DeltaContactMap dc(ContactMap(target), reference_average(target.side(), s_samples, s_seed));
      const ScoringFunction g(dc, e);
      std::vector<SolverRun> runs;
      if (s_solver == "exhaustive") {
        const auto ranking = exhaustive_sequence_search(comp, g);
        SolverRun run;
        for (std::size_t k = 0; k < std::min(s_topk, ranking.size()); ++k) {
          run.elite.push_back({ranking.sequence(k), ranking.entries()[k].value});
        }
        run.best = run.elite.front().sequence;
        run.best_value = run.elite.front().value;
        runs.push_back(std::move(run));
      } else {
        AnnealSchedule sched;
        sched.t_max = s_tmax;
        sched.t_min = s_tmin;
        sched.n_steps = s_steps;
        std::optional<QuboProblem> qubo;
        if (s_solver == "qubo-sa") qubo = encode(dc, e, comp, s_weights);
        auto one = [&](std::uint64_t seed) {
          AnnealSchedule s = sched;
          s.seed = seed;
          if (!qubo) return sequence_sa(g, random_sequence(comp, seed), s, RunOptions{s_topk, false});
          QuboSaOptions opts;
          opts.elite_size = s_topk;
          auto run = std::move(qubo_sa(*qubo, comp, s, 1, opts).restarts.front());
          for (auto& c : run.elite) c.value = g(c.sequence);
          if (run.found()) run.best_value = g(run.best);
          return run;
        };
        runs = s_budget ? timed_restarts(std::chrono::milliseconds(s_budget), s_seed, one)
                        : run_restarts(s_restarts, s_seed, default_thread_count(), one);
      }
      json arr = json::array();
      for (const auto& r : runs) {
        json elite = json::array();
        for (const auto& c : r.elite) elite.push_back({{"sequence", c.sequence.to_string()}, {"g", c.value}});
        arr.push_back({{"seed", r.seed},
                       {"best", r.found() ? r.best.to_string() : std::string()},
                       {"best_g", r.found() ? json(r.best_value) : json(nullptr)},
                       {"wall_seconds", r.wall_seconds},
                       {"elite", elite}});
      }
      json out = {{"solver", s_solver}, {"runs", arr}, {"candidates", json::array()}};
      for (const auto& c : select_candidates(runs, s_topk)) {
        out["candidates"].push_back({{"sequence", c.sequence.to_string()}, {"g", c.value}});
      }
      write_or_print(s_json, out.dump(2) + "\n");
      if (!s_csv.empty()) {
        std::ostringstream csv;
        csv << "run,best_g\n";
        for (std::size_t k = 0; k < runs.size(); ++k) {
          if (runs[k].found()) csv << k << ',' << fmt_real(runs[k].best_value) << '\n';
        }
        write_or_print(s_csv, csv.str());
      }
    } else if (*roc_cmd) {
      const auto comp = Composition::parse(r_comp);
      const int d = comp.alphabet_size();
      const auto truth = resolve_matrix(r_truth, d);
      if (r_mode == "learned" && r_matrix.empty()) throw InvalidArgument("--mode learned needs --matrix");
      const auto scoring = r_mode == "learned" ? resolve_matrix(r_matrix, d) : truth;
      const auto ensemble = CompactEnsemble::enumerate(r_side);
      const auto census = designability_census(ensemble, comp, truth, r_beta, r_p);
      const std::size_t target = r_target >= 0 ? static_cast<std::size_t>(r_target) : census.most_designable();
      if (target >= ensemble.size()) throw InvalidArgument("target index outside the ensemble");
      std::vector<std::uint8_t> by_rank(static_cast<std::size_t>(census.total_sequences), 0);
      for (const auto& s : census.designing[target]) by_rank[sequence_rank(comp, s)] = 1;
      const ScoringFunction g(DeltaContactMap(ensemble.contact_map(target), ensemble.average()), scoring);
      const auto ranking = exhaustive_sequence_search(comp, g);
      std::vector<std::uint8_t> flags(ranking.size());
      for (std::size_t k = 0; k < ranking.size(); ++k) flags[k] = by_rank[ranking.entries()[k].rank];
      const auto curve = roc(flags);
      fs::create_directories(r_out);
      std::ofstream csv(fs::path(r_out) / "roc.csv");
      write_roc_csv(csv, curve);
      const json summary = {{"mode", r_mode},
                            {"target", target},
                            {"q", curve.q},
                            {"designing", curve.positives},
                            {"sequences", ranking.size()}};
      std::ofstream(fs::path(r_out) / "summary.json") << summary.dump(2) << '\n';
      std::cout << "Q = " << fmt_real(curve.q) << " (target " << target << ", " << curve.positives
                << " designing of " << ranking.size() << ")\n";
    } else if (*design_cmd) {
      const auto cfg = load_design_config(d_config);
      DesignRunOptions opts;
      opts.output_dir = d_out;
      opts.resume = !d_fresh;
      const auto report = run_design(cfg, opts);
      write_or_print(d_report, report_to_json(report) + "\n");
      for (const auto& c : report.cycles) {
        std::cerr << "cycle " << c.cycle << ": f_c = " << fmt_real(c.success.f_c);
        if (c.roc_q) std::cerr << ", Q = " << fmt_real(*c.roc_q);
        if (c.refined) std::cerr << ", " << c.constraints << " constraints";
        std::cerr << '\n';
      }
      std::cerr << "status: " << to_string(report.status) << '\n';
    } else if (*bench_cmd) {
      b_cfg.composition = Composition::parse(b_comp);
      const auto report = benchmark_solvers(b_cfg, b_out);
      for (const auto& s : report.solvers) {
        std::cerr << s.solver << ": " << s.values.size() << " samples, min " << fmt_real(s.min) << ", median "
                  << fmt_real(s.median) << ", " << s.steps_per_sample << " steps/sample, "
                  << fmt_real(s.wall_seconds) << " s\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
