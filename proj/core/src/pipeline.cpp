#include "latdesign/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "latdesign/errors.hpp"
#include "latdesign/parallel.hpp"
#include "latdesign/refine.hpp"

namespace latdesign {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- helpers

std::string conformation_text(const Conformation& c) {
  std::ostringstream out;
  write_conformations(out, std::span<const Conformation>(&c, 1));
  std::string s = out.str();
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
  return s;
}

json matrix_json(const EnergyMatrix& e) {
  json rows = json::array();
  for (int m = 0; m < e.alphabet_size(); ++m) {
    json row = json::array();
    for (int n = 0; n < e.alphabet_size(); ++n) row.push_back(e(m, n));
    rows.push_back(std::move(row));
  }
  return rows;
}

EnergyMatrix matrix_from_json(const json& rows) {
  const auto d = static_cast<int>(rows.size());
  std::vector<double> entries;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != d) throw IoError("energy matrix rows must be square");
    for (const auto& v : row) entries.push_back(v.get<double>());
  }
  return EnergyMatrix(d, std::move(entries));
}

EnergyMatrix load_matrix_file(const std::string& path) { return read_energy_matrix_file(path).matrix; }

EnergyMatrix truth_matrix(const DesignConfig& cfg) {
  return cfg.truth_matrix.empty() ? ground_truth_matrix(cfg.alphabet_size()) : load_matrix_file(cfg.truth_matrix);
}

EnergyMatrix initial_matrix(const DesignConfig& cfg, const EnergyMatrix& truth) {
  if (cfg.init == "random") return random_energy_matrix(cfg.alphabet_size(), cfg.init_seed);
  if (cfg.init == "truth") return truth;
  return load_matrix_file(cfg.init);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << text;
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json config_json(const DesignConfig& cfg, bool include_runtime) {
  json target = {{"file", cfg.target.file}, {"verify", cfg.target.verify}};
  target["index"] = cfg.target.index ? json(*cfg.target.index) : json(nullptr);
  json j = {
      {"side", cfg.side},
      {"composition", cfg.composition.counts},
      {"target", target},
      {"truth_matrix", cfg.truth_matrix},
      {"init", cfg.init},
      {"init_seed", cfg.init_seed},
      {"beta", cfg.beta},
      {"p_fold", cfg.p_fold},
      {"weights", {{"A1", cfg.weights.a1}, {"A2", cfg.weights.a2}, {"B", cfg.weights.b}}},
      {"eta0", cfg.eta0},
      {"max_perceptron_iters", cfg.max_perceptron_iters},
      {"solver", to_string(cfg.solver)},
      {"schedule", {{"t_max", cfg.schedule.t_max}, {"t_min", cfg.schedule.t_min}, {"n_steps", cfg.schedule.n_steps}}},
      {"restarts", cfg.restarts},
      {"max_restart_batches", cfg.max_restart_batches},
      {"elite_size", cfg.elite_size},
      {"candidates", cfg.candidates},
      {"max_cycles", cfg.max_cycles},
      {"n_max", cfg.n_max},
      {"stop",
       {{"enabled", cfg.stop.enabled},
        {"f_c_threshold", cfg.stop.f_c_threshold},
        {"any_designing", cfg.stop.any_designing}}},
      {"seed", cfg.seed},
      {"evaluate_roc", cfg.evaluate_roc},
      {"census_cap", cfg.census_cap},
  };
  if (include_runtime) j["threads"] = cfg.threads;
  return j;
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end() && !it->is_null()) out = it->get<T>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
      throw InvalidArgument("unknown config key '" + where + key + "'");
    }
  }
}

// ---------------------------------------------------------------- records

json candidate_json(const CandidateOutcome& c) {
  return {{"sequence", c.sequence.to_string()}, {"g", c.g},           {"native", c.native},
          {"p_native", c.p_native},             {"unique", c.unique}, {"designing", c.designing}};
}

CandidateOutcome candidate_from_json(const json& j) {
  CandidateOutcome c;
  c.sequence = Sequence::parse(j.at("sequence").get<std::string>());
  c.g = j.at("g").get<double>();
  c.native = j.at("native").get<std::size_t>();
  c.p_native = j.at("p_native").get<double>();
  c.unique = j.at("unique").get<bool>();
  c.designing = j.at("designing").get<bool>();
  return c;
}

json cycle_json(const CycleRecord& r) {
  json cands = json::array();
  for (const auto& c : r.candidates) cands.push_back(candidate_json(c));
  json j = {
      {"cycle", r.cycle},
      {"epsilon", matrix_json(r.epsilon)},
      {"candidates", cands},
      {"f_c", r.success.f_c},
      {"designing", r.success.designing},
      {"candidate_count", r.success.size},
      {"cumulative_sequences", r.cumulative_sequences},
      {"stopped", r.stopped},
      {"refined", r.refined},
  };
  j["roc_q"] = r.roc_q ? json(*r.roc_q) : json(nullptr);
  if (r.refined) {
    j["refinement"] = {{"eta", r.eta},
                       {"constraints", r.constraints},
                       {"updates", r.perceptron_updates},
                       {"separable", r.separable},
                       {"violation", r.violation},
                       {"next_epsilon", matrix_json(r.next_epsilon)}};
  }
  return j;
}

CycleRecord cycle_from_json(const json& j) {
  CycleRecord r;
  r.cycle = j.at("cycle").get<std::size_t>();
  r.epsilon = matrix_from_json(j.at("epsilon"));
  for (const auto& c : j.at("candidates")) r.candidates.push_back(candidate_from_json(c));
  r.success.cycle = r.cycle;
  r.success.f_c = j.at("f_c").get<double>();
  r.success.designing = j.at("designing").get<std::size_t>();
  r.success.size = j.at("candidate_count").get<std::size_t>();
  r.cumulative_sequences = j.at("cumulative_sequences").get<std::size_t>();
  r.stopped = j.at("stopped").get<bool>();
  r.refined = j.at("refined").get<bool>();
  if (!j.at("roc_q").is_null()) r.roc_q = j.at("roc_q").get<double>();
  if (r.refined) {
    const auto& f = j.at("refinement");
    r.eta = f.at("eta").get<double>();
    r.constraints = f.at("constraints").get<std::size_t>();
    r.perceptron_updates = f.at("updates").get<std::size_t>();
    r.separable = f.at("separable").get<bool>();
    r.violation = f.at("violation").get<double>();
    r.next_epsilon = matrix_from_json(f.at("next_epsilon"));
  }
  return r;
}

DesignStatus final_status(const std::vector<CycleRecord>& cycles) {
  if (!cycles.empty() && cycles.back().stopped) return DesignStatus::solved;
  if (cycles.size() >= 2 && !cycles[cycles.size() - 2].separable) return DesignStatus::non_separable;
  return DesignStatus::max_cycles;
}

std::filesystem::path cycle_path(const std::filesystem::path& dir, std::size_t k) {
  return dir / ("cycle_" + std::to_string(k) + ".json");
}

// ---------------------------------------------------------------- design loop

std::vector<SolverRun> solve_cycle(const DesignConfig& cfg, const DeltaContactMap& dc, const EnergyMatrix& eps,
                                   std::size_t cycle, unsigned threads) {
  const ScoringFunction g(dc, eps);
  std::optional<QuboProblem> qubo;
  if (cfg.solver == SolverKind::qubo_sa) qubo = encode(dc, eps, cfg.composition, cfg.weights);

  std::vector<SolverRun> runs;
  for (std::size_t batch = 0; batch <= cfg.max_restart_batches; ++batch) {
    const std::uint64_t base = restart_seed(cfg.seed, cycle, batch * cfg.restarts);
    std::vector<SolverRun> more;
    if (cfg.solver == SolverKind::sequence_sa) {
      more = run_restarts(cfg.restarts, base, threads, [&](std::uint64_t seed) {
        AnnealSchedule sched = cfg.schedule;
        sched.seed = seed;
        return sequence_sa(g, random_sequence(cfg.composition, seed), sched, RunOptions{cfg.elite_size, false});
      });
    } else {
      AnnealSchedule sched = cfg.schedule;
      sched.seed = base;
      QuboSaOptions opts;
      opts.elite_size = cfg.elite_size;
      opts.threads = threads;
      more = qubo_sa(*qubo, cfg.composition, sched, cfg.restarts, opts).restarts;
      // QUBO energies are B * G; report G.
      for (auto& run : more) {
        for (auto& c : run.elite) c.value = g(c.sequence);
        std::sort(run.elite.begin(), run.elite.end(), [](const Candidate& a, const Candidate& b) {
          return a.value < b.value || (a.value == b.value && a.sequence < b.sequence);
        });
        if (run.found()) {
          run.best = run.elite.front().sequence;
          run.best_value = run.elite.front().value;
        }
      }
    }
    runs.insert(runs.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    if (select_candidates(runs, cfg.candidates).size() >= cfg.candidates) break;
  }
  return runs;
}

std::vector<std::uint8_t> designing_by_rank(const Composition& comp, const CensusResult& census,
                                            std::size_t target) {
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(census.total_sequences), 0);
  for (const auto& s : census.designing[target]) flags[sequence_rank(comp, s)] = 1;
  return flags;
}

double learned_roc_q(const Composition& comp, const DeltaContactMap& dc, const EnergyMatrix& eps,
                     const std::vector<std::uint8_t>& flags_by_rank, std::uint64_t cap, unsigned threads) {
  const ScoringFunction g(dc, eps);
  const auto ranking = exhaustive_sequence_search(comp, g, cap, threads);
  std::vector<std::uint8_t> flags(ranking.size());
  for (std::size_t k = 0; k < ranking.size(); ++k) flags[k] = flags_by_rank[ranking.entries()[k].rank];
  return roc_q(flags);
}

}  // namespace

// ---------------------------------------------------------------- config

const char* to_string(SolverKind kind) { return kind == SolverKind::sequence_sa ? "seq-sa" : "qubo-sa"; }

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "seq-sa") return SolverKind::sequence_sa;
  if (name == "qubo-sa") return SolverKind::qubo_sa;
  throw InvalidArgument("unknown solver '" + name + "' (expected seq-sa or qubo-sa)");
}

const char* to_string(DesignStatus s) {
  switch (s) {
    case DesignStatus::solved: return "solved";
    case DesignStatus::max_cycles: return "max-cycles";
    case DesignStatus::non_separable: return "non-separable";
  }
  return "unknown";
}

void DesignConfig::validate() const {
  if (side < 2) throw InvalidArgument("side must be at least 2");
  check_alphabet(alphabet_size());
  if (composition.total() != side * side) {
    throw InvalidArgument("composition " + composition.to_string() + " does not sum to side^2 = " +
                          std::to_string(side * side));
  }
  if (!(p_fold > 0.5) || !(p_fold < 1.0)) throw InvalidArgument("p_fold must lie in (0.5, 1)");
  if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
  weights.validate();
  if (eta0 < 0.0) throw InvalidArgument("eta0 must be non-negative (0 selects the default)");
  if (max_perceptron_iters == 0) throw InvalidArgument("max_perceptron_iters must be positive");
  schedule.validate();
  if (restarts == 0) throw InvalidArgument("restarts must be positive");
  if (candidates == 0) throw InvalidArgument("candidates (K) must be positive");
  if (elite_size == 0) throw InvalidArgument("elite_size must be positive");
  if (!(stop.f_c_threshold >= 0.0 && stop.f_c_threshold <= 1.0)) {
    throw InvalidArgument("stop.f_c_threshold must lie in [0, 1]");
  }
}

DesignConfig parse_design_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("design config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw IoError("design config must be a JSON object");
  reject_unknown(j,
                 {"side", "composition", "target", "truth_matrix", "init", "init_seed", "beta", "p_fold", "weights",
                  "eta0", "max_perceptron_iters", "solver", "schedule", "restarts", "max_restart_batches",
                  "elite_size", "candidates", "max_cycles", "n_max", "stop", "seed", "evaluate_roc", "census_cap",
                  "threads"},
                 "");
  DesignConfig cfg;
  try {
    read_field(j, "side", cfg.side);
    read_field(j, "composition", cfg.composition.counts);
    if (auto it = j.find("target"); it != j.end()) {
      reject_unknown(*it, {"index", "file", "verify"}, "target.");
      if (it->contains("index") && !it->at("index").is_null()) cfg.target.index = it->at("index").get<std::size_t>();
      read_field(*it, "file", cfg.target.file);
      read_field(*it, "verify", cfg.target.verify);
    }
    read_field(j, "truth_matrix", cfg.truth_matrix);
    read_field(j, "init", cfg.init);
    read_field(j, "init_seed", cfg.init_seed);
    read_field(j, "beta", cfg.beta);
    read_field(j, "p_fold", cfg.p_fold);
    if (auto it = j.find("weights"); it != j.end()) {
      reject_unknown(*it, {"A1", "A2", "B"}, "weights.");
      read_field(*it, "A1", cfg.weights.a1);
      read_field(*it, "A2", cfg.weights.a2);
      read_field(*it, "B", cfg.weights.b);
    }
    read_field(j, "eta0", cfg.eta0);
    read_field(j, "max_perceptron_iters", cfg.max_perceptron_iters);
    if (auto it = j.find("solver"); it != j.end()) cfg.solver = parse_solver_kind(it->get<std::string>());
    if (auto it = j.find("schedule"); it != j.end()) {
      reject_unknown(*it, {"t_max", "t_min", "n_steps"}, "schedule.");
      read_field(*it, "t_max", cfg.schedule.t_max);
      read_field(*it, "t_min", cfg.schedule.t_min);
      read_field(*it, "n_steps", cfg.schedule.n_steps);
    }
    read_field(j, "restarts", cfg.restarts);
    read_field(j, "max_restart_batches", cfg.max_restart_batches);
    read_field(j, "elite_size", cfg.elite_size);
    read_field(j, "candidates", cfg.candidates);
    read_field(j, "max_cycles", cfg.max_cycles);
    read_field(j, "n_max", cfg.n_max);
    if (auto it = j.find("stop"); it != j.end()) {
      reject_unknown(*it, {"enabled", "f_c_threshold", "any_designing"}, "stop.");
      read_field(*it, "enabled", cfg.stop.enabled);
      read_field(*it, "f_c_threshold", cfg.stop.f_c_threshold);
      read_field(*it, "any_designing", cfg.stop.any_designing);
    }
    read_field(j, "seed", cfg.seed);
    read_field(j, "evaluate_roc", cfg.evaluate_roc);
    read_field(j, "census_cap", cfg.census_cap);
    read_field(j, "threads", cfg.threads);
  } catch (const json::exception& e) {
    throw IoError(std::string("design config has a field of the wrong type: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

DesignConfig load_design_config(const std::filesystem::path& path) { return parse_design_config(read_text(path)); }

std::string design_config_to_json(const DesignConfig& cfg) { return config_json(cfg, true).dump(2); }

std::uint64_t config_hash(const DesignConfig& cfg) { return fnv1a(config_json(cfg, false).dump()); }

// ---------------------------------------------------------------- targets

TargetSelection select_target(const CompactEnsemble& ensemble, const Composition& comp, const EnergyMatrix& e_truth,
                              double beta, double p_fold, const TargetChoice& choice, const CensusOptions& census) {
  std::optional<std::size_t> explicit_index = choice.index;
  if (!choice.file.empty()) {
    const auto confs = read_conformations_file(choice.file);
    if (confs.empty()) throw IoError("target file holds no conformation: " + choice.file);
    const auto k = ensemble.find(confs.front());
    if (k < 0) throw DomainError("target conformation is not in the compact ensemble");
    explicit_index = static_cast<std::size_t>(k);
  }
  if (explicit_index && *explicit_index >= ensemble.size()) {
    throw InvalidArgument("target index " + std::to_string(*explicit_index) + " outside the ensemble of " +
                          std::to_string(ensemble.size()));
  }
  if (explicit_index && !choice.verify) return {*explicit_index, std::nullopt};

  CensusOptions opts = census;
  opts.keep_sequences = false;
  const auto result = designability_census(ensemble, comp, e_truth, beta, p_fold, opts);
  const std::size_t k = explicit_index ? *explicit_index : result.most_designable();
  const auto count = result.records[k].designing;
  if (count == 0) {
    throw DomainError(explicit_index ? "target structure " + std::to_string(k) + " is not designable"
                                     : std::string("no structure is designable for this composition"));
  }
  return {k, count};
}

bool stop_rule(std::span<const FoldResult> folds, std::size_t target, const StopRule& rule) {
  if (folds.empty()) return false;
  const auto rec = success_fraction(folds, target);
  return rec.f_c >= rule.f_c_threshold || (rule.any_designing && rec.designing > 0);
}

// ---------------------------------------------------------------- run

std::filesystem::path run_directory(const std::filesystem::path& output_dir, const DesignConfig& cfg) {
  return output_dir / ("run-" + hex64(config_hash(cfg)));
}

DesignReport run_design(const DesignConfig& cfg, const DesignRunOptions& opts) {
  cfg.validate();
  if (cfg.side > 6) throw ResourceLimitError("the design loop enumerates the ensemble; side above 6", cfg.side);
  const unsigned threads = cfg.threads ? cfg.threads : default_thread_count();
  const int d = cfg.alphabet_size();
  const EnergyMatrix truth = truth_matrix(cfg);
  if (truth.alphabet_size() != d) throw InvalidArgument("ground-truth matrix does not match the composition");

  const auto ensemble = CompactEnsemble::enumerate(cfg.side);
  const FoldingEngine oracle(ensemble, truth);

  DesignReport report;
  report.config_hash = config_hash(cfg);

  // Target and, when needed, the designing set used for ROC evaluation.
  std::optional<CensusResult> census;
  CensusOptions census_opts{cfg.census_cap, cfg.evaluate_roc, threads};
  if (cfg.evaluate_roc) {
    census = designability_census(ensemble, cfg.composition, truth, cfg.beta, cfg.p_fold, census_opts);
  }
  if (census && cfg.target.file.empty()) {
    const std::size_t k = cfg.target.index.value_or(census->most_designable());
    if (k >= ensemble.size()) throw InvalidArgument("target index outside the ensemble");
    if (census->records[k].designing == 0) throw DomainError("target structure is not designable");
    report.target = k;
    report.target_designing = census->records[k].designing;
  } else {
    const auto sel = select_target(ensemble, cfg.composition, truth, cfg.beta, cfg.p_fold, cfg.target, census_opts);
    report.target = sel.index;
    report.target_designing = sel.designing;
  }
  report.target_conformation = ensemble.conformation(report.target);
  const DeltaContactMap dc(ensemble.contact_map(report.target), ensemble.average());
  std::vector<std::uint8_t> flags_by_rank;
  if (census) flags_by_rank = designing_by_rank(cfg.composition, *census, report.target);

  const double eta0 = cfg.eta0 > 0.0 ? cfg.eta0 : default_eta0(d);
  ConstraintOptions constraint_opts{cfg.p_fold, cfg.beta, cfg.n_max};

  std::filesystem::path dir;
  if (!opts.output_dir.empty()) {
    dir = run_directory(opts.output_dir, cfg);
    std::filesystem::create_directories(dir);
    write_text_atomic(dir / "config.json", design_config_to_json(cfg) + "\n");
  }

  // Cumulative fold history, keyed by sequence.
  std::map<Sequence, FoldResult> history;
  auto remember = [&](const std::vector<CandidateOutcome>& cands) {
    for (const auto& c : cands) {
      if (!history.count(c.sequence)) history.emplace(c.sequence, oracle.fold(c.sequence, cfg.beta, cfg.p_fold));
    }
  };

  EnergyMatrix eps = initial_matrix(cfg, truth);
  if (eps.alphabet_size() != d) throw InvalidArgument("initial matrix does not match the composition");
  std::size_t first_cycle = 0;
  if (!dir.empty() && opts.resume) {
    for (std::size_t k = 0; std::filesystem::exists(cycle_path(dir, k)); ++k) {
      const json j = json::parse(read_text(cycle_path(dir, k)));
      if (j.at("config_hash").get<std::string>() != hex64(report.config_hash)) {
        throw IoError("checkpoint " + cycle_path(dir, k).string() + " belongs to a different config");
      }
      report.cycles.push_back(cycle_from_json(j.at("record")));
      remember(report.cycles.back().candidates);
    }
    if (!report.cycles.empty()) {
      const auto& last = report.cycles.back();
      if (!last.refined) {
        report.status = final_status(report.cycles);
        return report;
      }
      eps = last.next_epsilon;
      first_cycle = report.cycles.size();
    }
  }

  std::size_t new_cycles = 0;
  for (std::size_t k = first_cycle; k <= cfg.max_cycles; ++k) {
    if (opts.cycle_limit && new_cycles == *opts.cycle_limit) break;
    ++new_cycles;
    CycleRecord rec;
    rec.cycle = k;
    rec.epsilon = eps;

    // Step 1: sequence selection under the current matrix.
    const auto runs = solve_cycle(cfg, dc, eps, k, threads);
    const auto chosen = select_candidates(runs, cfg.candidates);

    // Step 2: ground-truth folding.
    std::vector<FoldResult> folds(chosen.size());
    parallel_chunks(chosen.size(), chosen.size(), threads, [&](std::size_t b, std::size_t e, std::size_t) {
      for (std::size_t i = b; i < e; ++i) folds[i] = oracle.fold(chosen[i].sequence, cfg.beta, cfg.p_fold);
    });
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      const auto& fr = folds[i];
      rec.candidates.push_back({chosen[i].sequence, chosen[i].value, fr.native(), fr.p_native,
                                fr.ground_states.size() == 1, fr.foldable && fr.native() == report.target});
      history.emplace(chosen[i].sequence, fr);
    }
    rec.success = success_fraction(folds, report.target, k);
    rec.cumulative_sequences = history.size();
    if (census) {
      rec.roc_q = learned_roc_q(cfg.composition, dc, eps, flags_by_rank, cfg.census_cap, threads);
    }
    rec.stopped = cfg.stop.enabled && stop_rule(folds, report.target, cfg.stop);

    // Step 3: refinement, unless this is the last cycle.
    if (!rec.stopped && k < cfg.max_cycles) {
      std::vector<FoldedSequence> cumulative;
      cumulative.reserve(history.size());
      for (const auto& [seq, fr] : history) cumulative.push_back({seq, fr});
      const auto constraints =
          build_constraints(cumulative, report.target, ensemble.contact_maps(), d, constraint_opts);
      rec.refined = true;
      rec.eta = eta_schedule(k, eta0);
      rec.constraints = constraints.size();
      const auto result = perceptron_refine(flatten(eps), constraints, rec.eta, cfg.max_perceptron_iters);
      rec.perceptron_updates = result.updates;
      rec.separable = result.satisfied;
      rec.violation = result.violation;
      rec.next_epsilon = unflatten(result.eps, d);
      eps = rec.next_epsilon;
    }

    if (!dir.empty()) {
      const json doc = {{"config_hash", hex64(report.config_hash)}, {"record", cycle_json(rec)}};
      write_text_atomic(cycle_path(dir, k), doc.dump(2) + "\n");
    }
    const bool done = !rec.refined;
    report.cycles.push_back(std::move(rec));
    if (done) break;
  }

  report.status = final_status(report.cycles);
  if (!dir.empty() && !report.cycles.empty() && !report.cycles.back().refined) {
    write_text_atomic(dir / "report.json", report_to_json(report) + "\n");
  }
  return report;
}

std::string report_to_json(const DesignReport& report) {
  json cycles = json::array();
  for (const auto& c : report.cycles) cycles.push_back(cycle_json(c));
  json j = {
      {"config_hash", hex64(report.config_hash)},
      {"target", {{"index", report.target}, {"conformation", report.target_conformation ? conformation_text(*report.target_conformation) : std::string()}}},
      {"cycles", cycles},
      {"status", to_string(report.status)},
  };
  j["target"]["designing"] = report.target_designing ? json(*report.target_designing) : json(nullptr);
  return j.dump(2);
}

// ---------------------------------------------------------------- benchmark

AverageContactMap reference_average(int side, std::size_t samples, std::uint64_t seed) {
  if (side <= 6) return CompactEnsemble::enumerate(side).average();
  if (samples == 0) throw InvalidArgument("reference sampling needs at least one sample");
  const auto confs = sample_compact_conformations(side, samples, seed);
  return average_contact_map(confs);
}

namespace {

using Clock = std::chrono::steady_clock;

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Picks a per-sample step count so that `samples` runs fill `budget_s`.
std::uint64_t calibrate_steps(const std::function<void(std::uint64_t)>& run, double budget_s, std::size_t samples) {
  std::uint64_t pilot = 2000;
  double elapsed = 0.0;
  for (;;) {
    const auto start = Clock::now();
    run(pilot);
    elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    if (elapsed > 0.02 || pilot > (1ull << 26)) break;
    pilot *= 4;
  }
  const double per_step = elapsed / static_cast<double>(pilot);
  const double steps = budget_s / static_cast<double>(samples) / per_step;
  return std::max<std::uint64_t>(100, static_cast<std::uint64_t>(steps));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

}  // namespace

BenchmarkReport benchmark_solvers(const BenchmarkConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.target_file.empty()) throw InvalidArgument("benchmark needs a target conformation file");
  if (!std::filesystem::exists(cfg.target_file)) throw IoError("target file not found: " + cfg.target_file);
  if (cfg.samples == 0) throw InvalidArgument("benchmark needs at least one sample");
  const auto confs = read_conformations_file(cfg.target_file);
  if (confs.empty()) throw IoError("target file holds no conformation: " + cfg.target_file);
  const Conformation& target = confs.front();
  if (static_cast<std::size_t>(cfg.composition.total()) != target.size()) {
    throw InvalidArgument("composition total does not match the target length");
  }
  const int d = cfg.composition.alphabet_size();
  const EnergyMatrix e = cfg.truth_matrix.empty() ? ground_truth_matrix(d) : load_matrix_file(cfg.truth_matrix);
  const DeltaContactMap dc(ContactMap(target), reference_average(target.side(), cfg.reference_samples, cfg.seed));
  const ScoringFunction g(dc, e);
  const QuboProblem qubo = encode(dc, e, cfg.composition, cfg.weights);
  const double budget_s = static_cast<double>(cfg.budget_ms) / 1000.0;

  auto schedule = [&](std::uint64_t steps, std::uint64_t seed) {
    AnnealSchedule s;
    s.t_max = cfg.t_max;
    s.t_min = cfg.t_min;
    s.n_steps = steps;
    s.seed = seed;
    return s;
  };
  auto seq_sample = [&](std::uint64_t steps, std::uint64_t seed) {
    return sequence_sa(g, random_sequence(cfg.composition, seed), schedule(steps, seed)).best_value;
  };
  auto qubo_sample = [&](std::uint64_t steps, std::uint64_t seed) -> std::optional<double> {
    const auto run = qubo_sa(qubo, cfg.composition, schedule(steps, seed), 1);
    if (!run.restarts.front().found()) return std::nullopt;
    return g(run.restarts.front().best);
  };

  BenchmarkReport report;
  std::filesystem::create_directories(out_dir);
  json summary = {{"target", conformation_text(target)},
                  {"composition", cfg.composition.counts},
                  {"budget_ms", cfg.budget_ms},
                  {"samples", cfg.samples},
                  {"solvers", json::object()}};

  for (const std::string name : {"seq-sa", "qubo-sa"}) {
    const bool is_seq = name == "seq-sa";
    const std::uint64_t base = cfg.seed + (is_seq ? 0 : 1'000'000ull);
    const auto steps = calibrate_steps(
        [&](std::uint64_t n) { is_seq ? (void)seq_sample(n, base) : (void)qubo_sample(n, base); }, budget_s,
        cfg.samples);
    SolverBenchmark b;
    b.solver = name;
    b.steps_per_sample = steps;
    const auto start = Clock::now();
    for (std::size_t s = 0; s < cfg.samples; ++s) {
      if (is_seq) {
        b.values.push_back(seq_sample(steps, base + s));
        ++b.valid;
      } else if (auto v = qubo_sample(steps, base + s)) {
        b.values.push_back(*v);
        ++b.valid;
      }
    }
    b.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (b.values.empty()) throw DomainError(name + " produced no valid sample");
    b.min = *std::min_element(b.values.begin(), b.values.end());
    b.median = median_of(b.values);

    std::ostringstream hist;
    write_histogram_csv(hist, g_histogram(b.values, cfg.bins));
    write_file(out_dir / ("hist_" + name + ".csv"), hist.str());
    std::ostringstream vals;
    vals << "sample,g\n";
    char buf[64];
    for (std::size_t s = 0; s < b.values.size(); ++s) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g\n", s, b.values[s]);
      vals << buf;
    }
    write_file(out_dir / ("values_" + name + ".csv"), vals.str());
    summary["solvers"][name] = {{"samples", b.values.size()},     {"valid", b.valid},   {"min", b.min},
                                {"median", b.median},             {"max", *std::max_element(b.values.begin(), b.values.end())},
                                {"steps_per_sample", b.steps_per_sample}, {"wall_seconds", b.wall_seconds}};
    report.solvers.push_back(std::move(b));
  }
  write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  return report;
}

}  // namespace latdesign
