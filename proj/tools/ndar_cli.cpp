// Command-line front end: instance generation, exact/annealed reference
// solving, single QAOA runs, NDAR runs, the three studies, and correlation
// statistics. Exit codes: 0 success, 2 configuration error, 3 capacity error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ndar/harness.hpp"
#include "ndar/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ndar::IsingHamiltonian load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ndar::ConfigError("cannot open instance file: " + path);
  return ndar::parse_instance(in);
}

struct CommonOpts {
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::string backend = "trajectories";
  int jobs = 1;
  double gamma_1q = 0.02;
  double gamma_2q = 0.10;
  std::string attractor;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--out-dir", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "root RNG seed");
  cmd->add_option("--backend", opts.backend,
                  "noiseless | trajectories | density");
  cmd->add_option("--jobs", opts.jobs, "worker threads");
  cmd->add_option("--gamma1", opts.gamma_1q, "1-qubit damping probability");
  cmd->add_option("--gamma2", opts.gamma_2q, "2-qubit damping probability");
  cmd->add_option("--attractor", opts.attractor, "attractor bitstring");
}

ndar::BackendSpec backend_spec(const CommonOpts& opts) {
  ndar::BackendSpec spec;
  spec.backend = ndar::parse_backend(opts.backend);
  spec.noise.gamma_1q = opts.gamma_1q;
  spec.noise.gamma_2q = opts.gamma_2q;
  if (!opts.attractor.empty())
    spec.noise.attractor = ndar::Bitstring::from_str(opts.attractor);
  spec.jobs = opts.jobs;
  return spec;
}

std::string trials_csv(const std::vector<ndar::Trial>& trials, int p) {
  std::vector<std::string> header = {"trial"};
  for (int l = 0; l < p; ++l) header.push_back("gamma" + std::to_string(l));
  for (int l = 0; l < p; ++l) header.push_back("beta" + std::to_string(l));
  header.push_back("ordering");
  header.push_back("mean");
  header.push_back("min");
  ndar::CsvBuilder csv(header);
  for (const auto& t : trials) {
    csv.cell(std::to_string(t.trial_index));
    for (double g : t.params.gammas) csv.cell(ndar::format_double(g));
    for (double b : t.params.betas) csv.cell(ndar::format_double(b));
    csv.cell(std::to_string(t.ordering_id));
    csv.cell(ndar::format_double(t.objective));
    csv.cell(ndar::format_double(t.best_in_trial.energy));
    csv.flush_row();
  }
  return csv.body();
}

std::string batch_csv(const ndar::SampleBatch& batch,
                      const ndar::IsingHamiltonian& frame) {
  ndar::CsvBuilder csv({"shot", "bitstring", "energy"});
  for (int s = 0; s < batch.shots; ++s) {
    csv.cell(std::to_string(s));
    csv.cell(batch.bitstrings[s].str());
    csv.cell(ndar::format_double(ndar::energy(frame, batch.bitstrings[s])));
    csv.flush_row();
  }
  return csv.body();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-directed adaptive remapping for Ising optimization"};
  app.require_subcommand(1);

  // --- gen ---------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate SK instances");
  int gen_n = 16, gen_count = 1;
  std::uint64_t gen_seed = 1;
  std::string gen_dir = "instances";
  gen->add_option("--n", gen_n, "qubit count")->required();
  gen->add_option("--count", gen_count, "number of instances");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out-dir", gen_dir, "output directory");

  // --- solve-exact ---------------------------------------------------------
  auto* solve = app.add_subcommand("solve-exact", "brute-force ground state");
  std::string solve_instance;
  solve->add_option("--instance", solve_instance, "instance file")->required();

  // --- anneal --------------------------------------------------------------
  auto* anneal = app.add_subcommand("anneal", "simulated annealing solver");
  std::string anneal_instance;
  ndar::AnnealSchedule schedule;
  anneal->add_option("--instance", anneal_instance, "instance file")->required();
  anneal->add_option("--sweeps", schedule.sweeps, "Metropolis sweeps");
  anneal->add_option("--beta-start", schedule.beta_start, "initial beta");
  anneal->add_option("--beta-end", schedule.beta_end, "final beta");
  anneal->add_option("--replicas", schedule.replicas, "independent replicas");
  anneal->add_option("--seed", schedule.seed, "RNG seed");

  // --- qaoa ----------------------------------------------------------------
  auto* qaoa = app.add_subcommand("qaoa", "single-frame QAOA parameter search");
  std::string qaoa_instance, qaoa_strategy = "tpe";
  int qaoa_p = 1, qaoa_trials = 20, qaoa_shots = 100, qaoa_orderings = 10;
  bool dump_circuit_flag = false;
  CommonOpts qaoa_opts;
  qaoa->add_option("--instance", qaoa_instance, "instance file")->required();
  qaoa->add_option("--p", qaoa_p, "QAOA layers");
  qaoa->add_option("--trials", qaoa_trials, "objective evaluations");
  qaoa->add_option("--shots", qaoa_shots, "samples per trial");
  qaoa->add_option("--orderings", qaoa_orderings, "gate orderings");
  qaoa->add_option("--strategy", qaoa_strategy, "random | grid | tpe");
  qaoa->add_flag("--dump-circuit", dump_circuit_flag,
                 "print the best-trial gate list and exit");
  add_common(qaoa, qaoa_opts);

  // --- ndar ----------------------------------------------------------------
  auto* ndar_cmd = app.add_subcommand("ndar", "run the NDAR outer loop");
  std::string ndar_instance, ndar_strategy = "tpe";
  int ndar_p = 1, ndar_trials = 20, ndar_shots = 100, ndar_orderings = 10,
      ndar_max_iters = 10;
  bool keep_samples = false;
  CommonOpts ndar_opts;
  ndar_cmd->add_option("--instance", ndar_instance, "instance file")->required();
  ndar_cmd->add_option("--p", ndar_p, "QAOA layers");
  ndar_cmd->add_option("--trials", ndar_trials, "trials per iteration");
  ndar_cmd->add_option("--shots", ndar_shots, "samples per trial");
  ndar_cmd->add_option("--orderings", ndar_orderings,
                       "fresh gate orderings per iteration");
  ndar_cmd->add_option("--max-iters", ndar_max_iters, "iteration cap");
  ndar_cmd->add_option("--strategy", ndar_strategy, "random | grid | tpe");
  ndar_cmd->add_flag("--keep-samples", keep_samples,
                     "persist per-iteration sample batches in trace.json");
  add_common(ndar_cmd, ndar_opts);

  // --- study ---------------------------------------------------------------
  auto* study = app.add_subcommand("study", "run a configured study");
  std::string study_kind, study_config;
  std::string study_out, study_backend;
  std::uint64_t study_seed = 0;
  bool study_seed_set = false, study_out_set = false, study_backend_set = false;
  int study_jobs = 0;
  study->add_option("kind", study_kind,
                    "correlation | convergence | distributions")
      ->required();
  study->add_option("--config", study_config, "key-value config file");
  study->add_option("--seed", study_seed, "override config seed")
      ->each([&](const std::string&) { study_seed_set = true; });
  study->add_option("--out-dir", study_out, "override output directory")
      ->each([&](const std::string&) { study_out_set = true; });
  study->add_option("--backend", study_backend, "override backend")
      ->each([&](const std::string&) { study_backend_set = true; });
  study->add_option("--jobs", study_jobs, "worker threads");

  // --- stats -----------------------------------------------------------
  auto* stats_cmd = app.add_subcommand("stats", "Pearson/Spearman of x,y pairs");
  std::string stats_file;
  stats_cmd->add_option("--pairs", stats_file,
                        "CSV file of x,y rows (no header); '-' for stdin")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      fs::create_directories(gen_dir);
      for (int i = 0; i < gen_count; ++i) {
        const auto H =
            ndar::generate_sk(gen_n, ndar::Rng::derive(gen_seed, std::uint64_t(i)));
        const std::string name = "sk_n" + std::to_string(gen_n) + "_" +
                                 std::to_string(i) + "_" +
                                 ndar::instance_hash(H) + ".txt";
        ndar::write_text_file(fs::path(gen_dir) / name,
                              ndar::serialize_instance(H));
        std::cout << (fs::path(gen_dir) / name).string() << "\n";
      }
    } else if (*solve) {
      const auto H = load_instance(solve_instance);
      const auto gs = ndar::brute_force(H);
      json out = ndar::ground_state_to_json(gs);
      out["instance_hash"] = ndar::instance_hash(H);
      std::cout << out.dump(2) << "\n";
    } else if (*anneal) {
      const auto H = load_instance(anneal_instance);
      const auto records = ndar::simulated_annealing(H, schedule);
      double best = records.front().energy;
      std::string best_x = records.front().bitstring.str();
      json replicas = json::array();
      for (const auto& r : records) {
        replicas.push_back({{"bitstring", r.bitstring.str()}, {"energy", r.energy}});
        if (r.energy < best) {
          best = r.energy;
          best_x = r.bitstring.str();
        }
      }
      json out = {{"energy", best},
                  {"bitstring", best_x},
                  {"exact", false},
                  {"replicas", replicas},
                  {"instance_hash", ndar::instance_hash(H)}};
      std::cout << out.dump(2) << "\n";
    } else if (*qaoa) {
      const auto H = load_instance(qaoa_instance);
      const auto spec = backend_spec(qaoa_opts);
      ndar::QaoaRunSpec run;
      run.p = qaoa_p;
      run.trials = qaoa_trials;
      run.shots = qaoa_shots;
      run.num_orderings = qaoa_orderings;
      run.strategy = ndar::parse_strategy(qaoa_strategy);
      const auto orderings = ndar::sample_orderings(
          H.n(), qaoa_orderings, ndar::Rng::derive(qaoa_opts.seed, 0x6f00ULL));

      fs::create_directories(qaoa_opts.out_dir);
      std::ofstream trials_stream(fs::path(qaoa_opts.out_dir) / "trials.csv");
      std::vector<std::string> header = {"trial"};
      for (int l = 0; l < qaoa_p; ++l) header.push_back("gamma" + std::to_string(l));
      for (int l = 0; l < qaoa_p; ++l) header.push_back("beta" + std::to_string(l));
      header.insert(header.end(), {"ordering", "mean", "min"});
      for (std::size_t i = 0; i < header.size(); ++i)
        trials_stream << (i ? "," : "") << header[i];
      trials_stream << "\n";
      auto on_trial = [&](const ndar::Trial& t) {
        trials_stream << t.trial_index;
        for (double g : t.params.gammas) trials_stream << "," << ndar::format_double(g);
        for (double b : t.params.betas) trials_stream << "," << ndar::format_double(b);
        trials_stream << "," << t.ordering_id << ","
                      << ndar::format_double(t.objective) << ","
                      << ndar::format_double(t.best_in_trial.energy) << "\n";
        trials_stream.flush();
      };

      const auto result = ndar::run_qaoa_search(
          H, run, spec, orderings, ndar::Rng::derive(qaoa_opts.seed, 0x0a00ULL),
          ndar::Rng::derive(qaoa_opts.seed, 0x5a00ULL), on_trial);
      const auto& best = ndar::best_trial(result.trials, ndar::BestCriterion::Mean);
      if (dump_circuit_flag) {
        const auto gl = ndar::build_qaoa_circuit(H, best.params,
                                                 orderings[best.ordering_id]);
        ndar::dump_circuit(gl, std::cout);
      }
      ndar::write_text_file(fs::path(qaoa_opts.out_dir) / "samples.csv",
                            batch_csv(result.batches[best.trial_index], H));
      json out = {{"best_trial", best.trial_index},
                  {"mean_energy", best.objective},
                  {"min_energy", best.best_in_trial.energy},
                  {"min_bitstring", best.best_in_trial.bitstring.str()},
                  {"instance_hash", ndar::instance_hash(H)}};
      std::cout << out.dump(2) << "\n";
    } else if (*ndar_cmd) {
      const auto H = load_instance(ndar_instance);
      const auto spec = backend_spec(ndar_opts);
      ndar::QaoaRunSpec run;
      run.p = ndar_p;
      run.trials = ndar_trials;
      run.shots = ndar_shots;
      run.num_orderings = ndar_orderings;
      run.strategy = ndar::parse_strategy(ndar_strategy);

      ndar::NdarConfig cfg;
      cfg.samples_per_iter = ndar_trials * ndar_shots;
      cfg.trials_per_iter = ndar_trials;
      cfg.max_iters = ndar_max_iters;
      cfg.orderings_per_iter = ndar_orderings;
      cfg.attractor = spec.noise.attractor;

      const auto trace = ndar::run_ndar(
          H, ndar::make_qaoa_optimizer(run, spec, ndar_opts.seed), cfg,
          keep_samples);

      fs::create_directories(ndar_opts.out_dir);
      ndar::write_text_file(fs::path(ndar_opts.out_dir) / "trace.json",
                            ndar::trace_to_json(trace, keep_samples).dump(2) + "\n");
      ndar::CsvBuilder csv({"iteration", "attractor_energy", "best_energy",
                            "mean_energy", "cumulative_gauge"});
      for (const auto& it : trace.iterations) {
        csv.cell(std::to_string(it.iteration));
        csv.cell(ndar::format_double(it.attractor_energy));
        csv.cell(ndar::format_double(it.best_energy));
        csv.cell(ndar::format_double(it.mean_energy));
        csv.cell(it.cumulative_gauge.mask.str());
        csv.flush_row();
      }
      ndar::write_text_file(fs::path(ndar_opts.out_dir) / "summary.csv", csv.body());
      json out = {{"iterations", trace.iterations.size()},
                  {"best_energy", trace.final_best.energy},
                  {"best_bitstring", trace.final_best.bitstring.str()},
                  {"total_samples", trace.total_samples},
                  {"instance_hash", ndar::instance_hash(H)}};
      std::cout << out.dump(2) << "\n";
    } else if (*study) {
      ndar::KeyValueConfig kv;
      if (!study_config.empty()) kv = ndar::load_config(study_config);
      kv["experiment"] = study_kind;
      if (study_seed_set) kv["seed"] = std::to_string(study_seed);
      if (study_backend_set) kv["backend"] = study_backend;
      auto cfg = ndar::ExperimentConfig::from_key_values(kv);
      if (study_out_set) cfg.out_dir = study_out;
      if (study_jobs > 0) cfg.jobs = study_jobs;
      const auto manifest = ndar::run_study(cfg);
      std::cout << manifest.to_json().dump(2) << "\n";
    } else if (*stats_cmd) {
      std::vector<std::pair<double, double>> pairs;
      std::istream* in = &std::cin;
      std::ifstream file;
      if (stats_file != "-") {
        file.open(stats_file);
        if (!file) throw ndar::ConfigError("cannot open " + stats_file);
        in = &file;
      }
      std::string line;
      while (std::getline(*in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double x, y;
        if (ls >> x >> y) pairs.emplace_back(x, y);
      }
      const auto c = ndar::correlation(pairs);
      json out = {{"pearson_r", c.pearson_r},
                  {"spearman_rho", c.spearman_rho},
                  {"pearson_p", ndar::pearson_p_value(c.pearson_r, pairs.size())},
                  {"pairs", pairs.size()}};
      std::cout << out.dump(2) << "\n";
    }
  } catch (const ndar::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return 3;
  } catch (const ndar::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ndar::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const ndar::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
