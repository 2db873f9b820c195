#pragma once

// Experiment harness: backend selection, the QAOA-based stochastic optimizer
// used by the NDAR loop, and the three configuration-driven studies
// (correlation, convergence, distributions) with machine-readable outputs.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "ndar/circuit.hpp"
#include "ndar/common.hpp"
#include "ndar/io.hpp"
#include "ndar/ising.hpp"
#include "ndar/ndar.hpp"
#include "ndar/paramopt.hpp"
#include "ndar/simulator.hpp"
#include "ndar/solvers.hpp"
#include "ndar/stats.hpp"

namespace ndar {

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

enum class Backend { Noiseless, Trajectories, Density };

inline Backend parse_backend(const std::string& s) {
  if (s == "noiseless") return Backend::Noiseless;
  if (s == "trajectories") return Backend::Trajectories;
  if (s == "density") return Backend::Density;
  throw ConfigError("unknown backend: " + s);
}

inline std::string backend_name(Backend b) {
  switch (b) {
    case Backend::Noiseless: return "noiseless";
    case Backend::Trajectories: return "trajectories";
    case Backend::Density: return "density";
  }
  return "?";
}

struct BackendSpec {
  Backend backend = Backend::Trajectories;
  NoiseModel noise;
  int jobs = 1;
};

inline SampleBatch run_backend(const GateList& gl, const BackendSpec& spec,
                               int shots, std::uint64_t seed) {
  switch (spec.backend) {
    case Backend::Noiseless:
      return simulate_noiseless(gl, shots, seed);
    case Backend::Trajectories:
      return simulate_trajectories(gl, spec.noise, shots, seed, spec.jobs);
    case Backend::Density:
      return sample_from_probabilities(simulate_density_oracle(gl, spec.noise),
                                       gl.n, shots, seed);
  }
  throw ConfigError("invalid backend");
}

// ---------------------------------------------------------------------------
// QAOA parameter search over one gauge frame
// ---------------------------------------------------------------------------

struct QaoaRunSpec {
  int p = 1;
  int trials = 20;
  int shots = 100;
  int num_orderings = 10;
  SearchStrategy strategy = SearchStrategy::Tpe;
  TpeOptions tpe;
};

struct QaoaSearchResult {
  std::vector<Trial> trials;
  std::vector<SampleBatch> batches;  // batches[t] produced trials[t]
};

inline EnergyRecord min_record(const SampleBatch& batch,
                               const IsingHamiltonian& frame) {
  if (batch.bitstrings.empty()) throw EmptyInputError("empty sample batch");
  EnergyRecord best{batch.bitstrings.front(),
                    energy(frame, batch.bitstrings.front()), false, 0.0};
  for (const auto& x : batch.bitstrings) {
    const double e = energy(frame, x);
    if (e < best.energy || (e == best.energy && x < best.bitstring))
      best = EnergyRecord{x, e, false, 0.0};
  }
  return best;
}

/// Runs the parameter search for one frame Hamiltonian. The optimizer seed
/// and the sampling seed root are separate so studies can hold the optimizer
/// stream fixed while per-trial sample seeds vary.
inline QaoaSearchResult run_qaoa_search(
    const IsingHamiltonian& frame, const QaoaRunSpec& spec,
    const BackendSpec& backend, const std::vector<GateOrdering>& orderings,
    std::uint64_t optimizer_seed, std::uint64_t sampling_seed,
    const std::function<void(const Trial&)>& on_trial = nullptr) {
  if (orderings.empty()) throw ConfigError("QAOA search requires >= 1 ordering");
  QaoaSearchResult result;
  result.batches.resize(spec.trials);

  ObjectiveFn objective = [&](const QaoaParams& params, int ordering_id,
                              int trial_index) {
    const GateList gl =
        build_qaoa_circuit(frame, params, orderings.at(ordering_id));
    SampleBatch batch = run_backend(
        gl, backend, spec.shots,
        Rng::derive(sampling_seed, std::uint64_t(trial_index)));
    const CostEstimate est = estimate_cost(batch, frame);
    ObjectiveResult res;
    res.mean = est.mean;
    res.best = min_record(batch, frame);
    res.batch_ref = batch.seed;
    result.batches[trial_index] = std::move(batch);
    return res;
  };

  SearchSpace space = SearchSpace::defaults(spec.p, int(orderings.size()));
  result.trials = run_search(objective, space, spec.trials, spec.strategy,
                             optimizer_seed, spec.tpe, on_trial);
  return result;
}

/// Stochastic optimizer for the NDAR loop: each iteration draws a fresh
/// random set of gate orderings, runs the parameter search (t trials of s
/// shots), and returns all M = t*s samples with frame energies.
inline StochasticOptimizer make_qaoa_optimizer(
    const QaoaRunSpec& spec, const BackendSpec& backend, std::uint64_t seed,
    std::vector<QaoaSearchResult>* per_iteration = nullptr) {
  return [spec, backend, seed, per_iteration](const IsingHamiltonian& frame,
                                              int iteration) {
    const auto orderings =
        sample_orderings(frame.n(), spec.num_orderings,
                         Rng::derive(seed, 0x6f00ULL + std::uint64_t(iteration)));
    QaoaSearchResult search = run_qaoa_search(
        frame, spec, backend, orderings,
        Rng::derive(seed, 0x0a00ULL + std::uint64_t(iteration)),
        Rng::derive(seed, 0x5a00ULL + std::uint64_t(iteration)));
    IterationSamples out;
    out.bitstrings.reserve(std::size_t(spec.trials) * spec.shots);
    for (const auto& batch : search.batches)
      for (const auto& x : batch.bitstrings) {
        out.bitstrings.push_back(x);
        out.energies.push_back(energy(frame, x));
      }
    if (per_iteration) per_iteration->push_back(std::move(search));
    return out;
  };
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::string kind = "correlation";  // correlation | convergence | distributions
  int n = 16;
  int instance_count = 10;
  std::uint64_t instance_seed = 1;
  Backend backend = Backend::Trajectories;
  NoiseModel noise = NoiseModel::strong_damping();
  int p = 1;
  int trials = 20;       // t, per optimization run (per NDAR iteration)
  int shots = 100;       // s, samples per trial
  int gauges = 20;       // correlation study: random gauges per instance
  int max_iters = 10;    // NDAR cap
  int orderings = 10;    // gate orderings per optimization run
  SearchStrategy strategy = SearchStrategy::Tpe;
  std::vector<double> quantiles = {0.001, 0.1, 1.0};
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int jobs = 1;
  bool svg = false;

  static ExperimentConfig from_key_values(const KeyValueConfig& kv) {
    ExperimentConfig cfg;
    auto geti = [&](const char* k, int& dst) {
      if (auto it = kv.find(k); it != kv.end()) dst = std::stoi(it->second);
    };
    auto getu = [&](const char* k, std::uint64_t& dst) {
      if (auto it = kv.find(k); it != kv.end()) dst = std::stoull(it->second);
    };
    auto getd = [&](const char* k, double& dst) {
      if (auto it = kv.find(k); it != kv.end()) dst = std::stod(it->second);
    };
    if (auto it = kv.find("experiment"); it != kv.end()) cfg.kind = it->second;
    geti("n", cfg.n);
    geti("instances", cfg.instance_count);
    getu("instance_seed", cfg.instance_seed);
    if (auto it = kv.find("backend"); it != kv.end())
      cfg.backend = parse_backend(it->second);
    getd("gamma_1q", cfg.noise.gamma_1q);
    getd("gamma_2q", cfg.noise.gamma_2q);
    if (auto it = kv.find("attractor"); it != kv.end())
      cfg.noise.attractor = Bitstring::from_str(it->second);
    geti("p", cfg.p);
    geti("trials", cfg.trials);
    geti("samples", cfg.shots);
    geti("gauges", cfg.gauges);
    geti("max_iters", cfg.max_iters);
    geti("orderings", cfg.orderings);
    if (auto it = kv.find("strategy"); it != kv.end())
      cfg.strategy = parse_strategy(it->second);
    if (auto it = kv.find("quantiles"); it != kv.end()) {
      cfg.quantiles.clear();
      std::istringstream qs(it->second);
      double q;
      while (qs >> q) cfg.quantiles.push_back(q);
    }
    getu("seed", cfg.seed);
    if (auto it = kv.find("out_dir"); it != kv.end()) cfg.out_dir = it->second;
    geti("jobs", cfg.jobs);
    if (auto it = kv.find("svg"); it != kv.end()) cfg.svg = it->second == "1" || it->second == "true";
    cfg.validate();
    return cfg;
  }

  KeyValueConfig to_key_values() const {
    KeyValueConfig kv;
    kv["experiment"] = kind;
    kv["n"] = std::to_string(n);
    kv["instances"] = std::to_string(instance_count);
    kv["instance_seed"] = std::to_string(instance_seed);
    kv["backend"] = backend_name(backend);
    kv["gamma_1q"] = format_double(noise.gamma_1q);
    kv["gamma_2q"] = format_double(noise.gamma_2q);
    if (noise.attractor.size()) kv["attractor"] = noise.attractor.str();
    kv["p"] = std::to_string(p);
    kv["trials"] = std::to_string(trials);
    kv["samples"] = std::to_string(shots);
    kv["gauges"] = std::to_string(gauges);
    kv["max_iters"] = std::to_string(max_iters);
    kv["orderings"] = std::to_string(orderings);
    kv["strategy"] = strategy == SearchStrategy::Tpe
                         ? "tpe"
                         : (strategy == SearchStrategy::Grid ? "grid" : "random");
    std::string qs;
    for (double q : quantiles) {
      if (!qs.empty()) qs += ' ';
      qs += format_double(q);
    }
    kv["quantiles"] = qs;
    kv["seed"] = std::to_string(seed);
    return kv;
  }

  void validate() const {
    noise.validate();
    if (n < 2) throw ConfigError("experiment requires n >= 2");
    if (instance_count < 1 || trials < 1 || shots < 1 || max_iters < 1 ||
        gauges < 1 || orderings < 1 || p < 1)
      throw ConfigError("experiment budgets must be positive");
    for (double q : quantiles)
      if (q <= 0.0 || q > 1.0) throw ConfigError("quantiles must lie in (0,1]");
  }

  std::string config_hash() const {
    return hex64(fnv1a(canonical_config_text(to_key_values())));
  }

  IsingHamiltonian instance(int index) const {
    return generate_sk(n, Rng::derive(instance_seed, std::uint64_t(index)));
  }

  BackendSpec backend_spec() const { return BackendSpec{backend, noise, jobs}; }

  QaoaRunSpec qaoa_spec() const {
    QaoaRunSpec q;
    q.p = p;
    q.trials = trials;
    q.shots = shots;
    q.num_orderings = orderings;
    q.strategy = strategy;
    return q;
  }
};

/// Ground-state energy for AR reporting. Exhaustive at desk scale; larger
/// instances must be solved up front (solve-exact / anneal) instead.
inline double reference_ground_energy(const IsingHamiltonian& H) {
  if (H.n() > kBruteForceCap)
    throw CapacityError(
        "no E_GS available for n=" + std::to_string(H.n()) +
        "; run solve-exact (or anneal) first and pass the energy explicitly");
  return brute_force(H).energy;
}

// ---------------------------------------------------------------------------
// Correlation study (attractor AR vs achieved AR over random gauges)
// ---------------------------------------------------------------------------

struct CorrelationRow {
  int instance_index = 0;
  std::string instance_hash;
  Bitstring gauge;
  double attractor_ar = 0.0;
  std::vector<double> qaoa_ar;  // one per requested quantile
};

struct CorrelationResult {
  std::vector<double> quantiles;
  std::vector<CorrelationRow> rows;
  std::vector<Correlation> per_quantile_corr;
  std::vector<double> per_quantile_p;
};

inline CorrelationResult correlation_study(const ExperimentConfig& cfg) {
  cfg.validate();
  CorrelationResult result;
  result.quantiles = cfg.quantiles;

  // The optimizer seed is fixed across all gauges and instances so the
  // parameter search itself cannot introduce gauge-dependent variation;
  // only sampling seeds vary.
  const std::uint64_t optimizer_seed = Rng::derive(cfg.seed, 0x0a0aULL);

  for (int inst = 0; inst < cfg.instance_count; ++inst) {
    const IsingHamiltonian H = cfg.instance(inst);
    const double e_gs = reference_ground_energy(H);
    const auto orderings = sample_orderings(
        cfg.n, cfg.orderings, Rng::derive(cfg.seed, 0x6f00ULL + inst));
    Rng gauge_rng(Rng::derive(cfg.seed, 0x9a00ULL + inst));
    for (int g = 0; g < cfg.gauges; ++g) {
      const GaugeMask y(Bitstring::random(cfg.n, gauge_rng));
      const IsingHamiltonian Hy = gauge_transform(H, y);
      const Bitstring attractor = cfg.noise.attractor.size()
                                      ? cfg.noise.attractor
                                      : Bitstring(std::size_t(cfg.n));
      CorrelationRow row;
      row.instance_index = inst;
      row.instance_hash = instance_hash(H);
      row.gauge = y.mask;
      row.attractor_ar = approximation_ratio(energy(Hy, attractor), e_gs);

      const QaoaSearchResult search = run_qaoa_search(
          Hy, cfg.qaoa_spec(), cfg.backend_spec(), orderings, optimizer_seed,
          Rng::derive(cfg.seed, 0x5a0000ULL + std::uint64_t(inst) * 1000 + g));
      const Trial& best = best_trial(search.trials, BestCriterion::Mean);
      const CostEstimate est =
          estimate_cost(search.batches[best.trial_index], Hy);
      for (double q : cfg.quantiles)
        row.qaoa_ar.push_back(approximation_ratio(est.quantile_mean(q), e_gs));
      result.rows.push_back(std::move(row));
    }
  }

  for (std::size_t qi = 0; qi < cfg.quantiles.size(); ++qi) {
    std::vector<std::pair<double, double>> pairs;
    for (const auto& row : result.rows)
      pairs.emplace_back(row.attractor_ar, row.qaoa_ar[qi]);
    try {
      const Correlation c = correlation(pairs);
      result.per_quantile_corr.push_back(c);
      result.per_quantile_p.push_back(pearson_p_value(c.pearson_r, pairs.size()));
    } catch (const StatError&) {
      // Degenerate column (e.g. every best sample hits the optimum at desk
      // scale): report NaN rather than aborting the whole study.
      const double nan = std::numeric_limits<double>::quiet_NaN();
      result.per_quantile_corr.push_back(Correlation{nan, nan});
      result.per_quantile_p.push_back(nan);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Convergence study (NDAR vs standard QAOA vs random, matched budgets)
// ---------------------------------------------------------------------------

struct ConvergencePoint {
  int instance_index = 0;
  int iteration = 0;
  long long samples_used = 0;  // identical across arms by construction
  double ndar_best_ar = 0.0;
  double qaoa_best_ar = 0.0;
  double random_best_ar = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergencePoint> points;
  std::vector<NdarTrace> traces;  // one per instance
};

inline ConvergenceResult convergence_study(const ExperimentConfig& cfg) {
  cfg.validate();
  ConvergenceResult result;
  const long long M = (long long)cfg.trials * cfg.shots;

  for (int inst = 0; inst < cfg.instance_count; ++inst) {
    const IsingHamiltonian H = cfg.instance(inst);
    const double e_gs = reference_ground_energy(H);
    const std::uint64_t inst_seed = Rng::derive(cfg.seed, 0xc0ULL + inst);

    // Arm 1: NDAR.
    NdarConfig ncfg;
    ncfg.samples_per_iter = int(M);
    ncfg.trials_per_iter = cfg.trials;
    ncfg.max_iters = cfg.max_iters;
    ncfg.orderings_per_iter = cfg.orderings;
    ncfg.attractor = cfg.noise.attractor;
    NdarTrace trace = run_ndar(
        H, make_qaoa_optimizer(cfg.qaoa_spec(), cfg.backend_spec(), inst_seed),
        ncfg);
    const int i_max = int(trace.iterations.size());

    std::vector<double> ndar_best(i_max);
    double run_best = trace.iterations[0].best_energy;
    for (int i = 0; i < i_max; ++i) {
      run_best = std::min(run_best, trace.iterations[i].best_energy);
      ndar_best[i] = run_best;
    }

    // Arm 2: standard single-frame QAOA with the matched total budget:
    // i_max*t trials over a pool of (orderings per iteration)*i_max GOs.
    QaoaRunSpec qspec = cfg.qaoa_spec();
    qspec.trials = cfg.trials * i_max;
    qspec.num_orderings = cfg.orderings * i_max;
    const auto pool = sample_orderings(cfg.n, qspec.num_orderings,
                                       Rng::derive(inst_seed, 0x6fffULL));
    const QaoaSearchResult qaoa =
        run_qaoa_search(H, qspec, cfg.backend_spec(), pool,
                        Rng::derive(inst_seed, 0x0affULL),
                        Rng::derive(inst_seed, 0x5affULL));
    std::vector<double> qaoa_best(i_max);
    {
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < i_max; ++i) {
        for (int t = i * cfg.trials; t < (i + 1) * cfg.trials; ++t)
          best = std::min(best, qaoa.trials[t].best_in_trial.energy);
        qaoa_best[i] = best;
      }
    }

    // Arm 3: uniform random sampling with the same total shot count.
    const auto random_records =
        random_sampling(H, int(M) * i_max, Rng::derive(inst_seed, 0x44ULL));
    std::vector<double> random_best(i_max);
    {
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < i_max; ++i) {
        for (long long s = i * M; s < (i + 1) * M; ++s)
          best = std::min(best, random_records[s].energy);
        random_best[i] = best;
      }
    }

    for (int i = 0; i < i_max; ++i) {
      ConvergencePoint pt;
      pt.instance_index = inst;
      pt.iteration = i;
      pt.samples_used = M * (i + 1);
      if (pt.samples_used != M * (i + 1))
        throw Error("budget parity violated");  // guards future edits
      pt.ndar_best_ar = approximation_ratio(ndar_best[i], e_gs);
      pt.qaoa_best_ar = approximation_ratio(qaoa_best[i], e_gs);
      pt.random_best_ar = approximation_ratio(random_best[i], e_gs);
      result.points.push_back(pt);
    }
    result.traces.push_back(std::move(trace));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Distribution study (per-iteration AR / raw-HW / effective-HW histograms)
// ---------------------------------------------------------------------------

struct DistributionRow {
  int instance_index = 0;
  int iteration = 0;
  std::string kind;  // "ar" | "raw_hw" | "effective_hw"
  double bin_lo = 0.0;
  double bin_hi = 0.0;
  double density = 0.0;
};

struct DistributionResult {
  std::vector<DistributionRow> rows;
  std::vector<NdarTrace> traces;
  // Modes per instance per iteration, for the structure checks.
  std::vector<std::vector<int>> raw_hw_mode;
  std::vector<std::vector<int>> effective_hw_mode;
};

inline int histogram_mode_bin(const std::vector<int>& counts) {
  return int(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

inline DistributionResult distribution_study(const ExperimentConfig& cfg) {
  cfg.validate();
  DistributionResult result;
  for (int inst = 0; inst < cfg.instance_count; ++inst) {
    const IsingHamiltonian H = cfg.instance(inst);
    const double e_gs = reference_ground_energy(H);
    const std::uint64_t inst_seed = Rng::derive(cfg.seed, 0xd0ULL + inst);

    NdarConfig ncfg;
    ncfg.samples_per_iter = cfg.trials * cfg.shots;
    ncfg.trials_per_iter = cfg.trials;
    ncfg.max_iters = cfg.max_iters;
    ncfg.orderings_per_iter = cfg.orderings;
    ncfg.attractor = cfg.noise.attractor;
    NdarTrace trace = run_ndar(
        H, make_qaoa_optimizer(cfg.qaoa_spec(), cfg.backend_spec(), inst_seed),
        ncfg, /*keep_samples=*/true);

    std::vector<int> raw_modes, eff_modes;
    for (const auto& it : trace.iterations) {
      if (it.samples.empty())
        throw ConfigError(
            "distribution study requires persisted sample batches; rerun NDAR "
            "with sample persistence enabled");
      std::vector<int> raw_counts(cfg.n + 1, 0), eff_counts(cfg.n + 1, 0);
      std::vector<double> ars;
      for (std::size_t s = 0; s < it.samples.size(); ++s) {
        raw_counts[it.samples[s].popcount()]++;
        eff_counts[effective_hamming_weight(it.samples[s], it.frame_gauge)]++;
        ars.push_back(approximation_ratio(it.sample_energies[s], e_gs));
      }
      raw_modes.push_back(histogram_mode_bin(raw_counts));
      eff_modes.push_back(histogram_mode_bin(eff_counts));

      const double total = double(it.samples.size());
      for (int w = 0; w <= cfg.n; ++w) {
        result.rows.push_back({inst, it.iteration, "raw_hw", double(w),
                               double(w + 1), raw_counts[w] / total});
        result.rows.push_back({inst, it.iteration, "effective_hw", double(w),
                               double(w + 1), eff_counts[w] / total});
      }
      const Histogram ar_hist = histogram(
          ars, *std::min_element(ars.begin(), ars.end()) - 1e-9, 1.0 + 1e-9, 40);
      for (std::size_t b = 0; b < ar_hist.counts.size(); ++b)
        result.rows.push_back({inst, it.iteration, "ar", ar_hist.edges[b],
                               ar_hist.edges[b + 1], ar_hist.counts[b]});
    }
    result.raw_hw_mode.push_back(std::move(raw_modes));
    result.effective_hw_mode.push_back(std::move(eff_modes));
    result.traces.push_back(std::move(trace));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Study output files
// ---------------------------------------------------------------------------

inline std::string correlation_summary_csv(const CorrelationResult& r) {
  std::vector<std::string> header = {"instance", "instance_hash", "gauge",
                                     "attractor_ar"};
  for (double q : r.quantiles) header.push_back("qaoa_ar_q" + format_double(q));
  CsvBuilder csv(header);
  for (const auto& row : r.rows) {
    csv.cell(std::to_string(row.instance_index));
    csv.cell(row.instance_hash);
    csv.cell(row.gauge.str());
    csv.cell(format_double(row.attractor_ar));
    for (double ar : row.qaoa_ar) csv.cell(format_double(ar));
    csv.flush_row();
  }
  return csv.body();
}

inline std::string correlation_stats_csv(const CorrelationResult& r) {
  CsvBuilder csv({"quantile", "pearson_r", "spearman_rho", "pearson_p"});
  for (std::size_t i = 0; i < r.quantiles.size(); ++i) {
    csv.cell(format_double(r.quantiles[i]));
    csv.cell(format_double(r.per_quantile_corr[i].pearson_r));
    csv.cell(format_double(r.per_quantile_corr[i].spearman_rho));
    csv.cell(format_double(r.per_quantile_p[i]));
    csv.flush_row();
  }
  return csv.body();
}

inline std::string convergence_summary_csv(const ConvergenceResult& r) {
  CsvBuilder csv({"instance", "iteration", "samples_used", "ndar_best_ar",
                  "qaoa_best_ar", "random_best_ar"});
  for (const auto& pt : r.points) {
    csv.cell(std::to_string(pt.instance_index));
    csv.cell(std::to_string(pt.iteration));
    csv.cell(std::to_string(pt.samples_used));
    csv.cell(format_double(pt.ndar_best_ar));
    csv.cell(format_double(pt.qaoa_best_ar));
    csv.cell(format_double(pt.random_best_ar));
    csv.flush_row();
  }
  return csv.body();
}

inline std::string distribution_summary_csv(const DistributionResult& r) {
  CsvBuilder csv({"instance", "iteration", "kind", "bin_lo", "bin_hi", "density"});
  for (const auto& row : r.rows) {
    csv.cell(std::to_string(row.instance_index));
    csv.cell(std::to_string(row.iteration));
    csv.cell(row.kind);
    csv.cell(format_double(row.bin_lo));
    csv.cell(format_double(row.bin_hi));
    csv.cell(format_double(row.density));
    csv.flush_row();
  }
  return csv.body();
}

/// Runs the configured study and writes manifest.json + summary.csv (and
/// study-specific extras) under cfg.out_dir. Returns the manifest.
inline RunManifest run_study(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  RunManifest manifest;
  manifest.config_hash = cfg.config_hash();
  manifest.seed = cfg.seed;
  for (int i = 0; i < cfg.instance_count; ++i)
    manifest.instance_hashes.push_back(instance_hash(cfg.instance(i)));

  auto emit = [&](const std::string& name, const std::string& body) {
    write_text_file(dir / name, body);
    manifest.output_files.push_back(name);
  };

  if (cfg.kind == "correlation") {
    const CorrelationResult r = correlation_study(cfg);
    emit("summary.csv", correlation_summary_csv(r));
    emit("correlations.csv", correlation_stats_csv(r));
    if (cfg.svg) {
      SvgSeries s;
      s.label = "attractor AR vs mean AR";
      s.color = "steelblue";
      for (const auto& row : r.rows)
        s.points.emplace_back(row.attractor_ar, row.qaoa_ar.back());
      std::sort(s.points.begin(), s.points.end());
      emit("correlation.svg", svg_line_plot({s}, "correlation study"));
    }
  } else if (cfg.kind == "convergence") {
    const ConvergenceResult r = convergence_study(cfg);
    emit("summary.csv", convergence_summary_csv(r));
    nlohmann::json traces = nlohmann::json::array();
    for (const auto& t : r.traces) traces.push_back(trace_to_json(t));
    emit("trace.json", traces.dump(2) + "\n");
    if (cfg.svg) {
      std::vector<SvgSeries> series(3);
      series[0] = {"ndar", "darkorange", {}};
      series[1] = {"qaoa", "steelblue", {}};
      series[2] = {"random", "gray", {}};
      for (const auto& pt : r.points)
        if (pt.instance_index == 0) {
          series[0].points.emplace_back(pt.iteration, pt.ndar_best_ar);
          series[1].points.emplace_back(pt.iteration, pt.qaoa_best_ar);
          series[2].points.emplace_back(pt.iteration, pt.random_best_ar);
        }
      emit("convergence.svg", svg_line_plot(series, "convergence study"));
    }
  } else if (cfg.kind == "distributions") {
    const DistributionResult r = distribution_study(cfg);
    emit("summary.csv", distribution_summary_csv(r));
    nlohmann::json traces = nlohmann::json::array();
    for (const auto& t : r.traces) traces.push_back(trace_to_json(t));
    emit("trace.json", traces.dump(2) + "\n");
  } else {
    throw ConfigError("unknown experiment kind: " + cfg.kind);
  }

  write_text_file(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  return manifest;
}

}  // namespace ndar
