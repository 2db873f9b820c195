#pragma once

// The NDAR outer loop: run a stochastic optimizer on the current gauge frame,
// pick the best bitstring, re-gauge the Hamiltonian so the attractor takes
// its energy, and repeat until no improvement.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ndar/common.hpp"
#include "ndar/ising.hpp"

namespace ndar {

enum class TerminationRule {
  NoImprovement,  // stop when neither best nor mean energy decreased
  MaxIters,       // stop only at the iteration cap
};

inline TerminationRule parse_termination(const std::string& s) {
  if (s == "no_improvement") return TerminationRule::NoImprovement;
  if (s == "max_iters") return TerminationRule::MaxIters;
  throw ConfigError("unknown termination rule: " + s);
}

struct NdarConfig {
  int samples_per_iter = 2000;  // M
  int trials_per_iter = 20;     // t
  int max_iters = 10;
  TerminationRule termination = TerminationRule::NoImprovement;
  double termination_epsilon = 0.0;
  Bitstring attractor;  // empty means |0...0>
  int orderings_per_iter = 10;

  void validate(int n) const {
    if (samples_per_iter < 1 || trials_per_iter < 1 || max_iters < 1)
      throw ConfigError("NDAR config requires M, t, max_iters >= 1");
    if (attractor.size() && int(attractor.size()) != n)
      throw ConfigError("NDAR attractor length mismatch");
  }

  Bitstring attractor_or_zero(int n) const {
    return attractor.size() ? attractor : Bitstring(std::size_t(n));
  }
};

struct NdarIteration {
  int iteration = 0;
  Bitstring gauge_applied;       // mask XORed into the frame after this step
  GaugeMask frame_gauge;         // original -> frame in effect DURING this step
  GaugeMask cumulative_gauge;    // XOR of all gauge_applied up to and incl. j
  double attractor_energy = 0.0; // frame energy of the attractor at the start
  double best_energy = 0.0;      // E*_(j), min over this iteration's samples
  double mean_energy = 0.0;
  Bitstring best_bitstring;      // frame of this iteration
  std::vector<Bitstring> samples;       // retained when cfg asks for it
  std::vector<double> sample_energies;  // frame energies, always retained
};

struct NdarTrace {
  std::vector<NdarIteration> iterations;
  EnergyRecord final_best;  // original-frame best over all iterations
  GaugeMask final_gauge;
  long long total_samples = 0;
  bool terminated_by_rule = false;
};

/// Stochastic-optimizer contract: given the current-frame Hamiltonian and the
/// iteration index, return at least M samples with their frame energies.
struct IterationSamples {
  std::vector<Bitstring> bitstrings;
  std::vector<double> energies;
};
using StochasticOptimizer =
    std::function<IterationSamples(const IsingHamiltonian& frame, int iteration)>;

/// x in the current frame maps to x XOR g in the original frame:
/// energy(H0, x XOR g) == energy(H_frame, x).
inline Bitstring to_original_frame(const Bitstring& x, const GaugeMask& g) {
  if (x.size() != g.size())
    throw DimensionError("to_original_frame: length mismatch");
  return x ^ g.mask;
}

/// No-improvement check between the last two iterations: true iff neither
/// the minimal energy nor the mean estimator decreased by more than eps.
inline bool termination_check(const NdarTrace& trace, TerminationRule rule,
                              int max_iters, double eps = 0.0) {
  if (trace.iterations.empty())
    throw ConfigError("termination check requires >= 1 completed iteration");
  const int j = int(trace.iterations.size()) - 1;
  if (j + 1 >= max_iters) return true;
  if (rule == TerminationRule::MaxIters) return false;
  if (j == 0) return false;
  const auto& cur = trace.iterations[j];
  const auto& prev = trace.iterations[j - 1];
  return cur.best_energy >= prev.best_energy - eps &&
         cur.mean_energy >= prev.mean_energy - eps;
}

/// Algorithm steps per iteration j >= 0:
///   1. collect M samples for the frame Hamiltonian H_(j-1);
///   2. evaluate frame energies;
///   3. select minimal-energy x* (lexicographic tie-break) and check the
///      termination rule;
///   4. re-gauge by x* XOR attractor so energy(H_(j), attractor) == E*_(j),
///      fold the mask into the cumulative gauge, loop.
/// Returns the full trace plus the best original-frame solution.
inline NdarTrace run_ndar(const IsingHamiltonian& H0,
                          const StochasticOptimizer& optimizer,
                          const NdarConfig& cfg, bool keep_samples = false) {
  cfg.validate(H0.n());
  const int n = H0.n();
  const Bitstring attractor = cfg.attractor_or_zero(n);

  NdarTrace trace;
  trace.final_gauge = GaugeMask::identity(n);
  IsingHamiltonian frame = H0;
  GaugeMask cumulative = GaugeMask::identity(n);
  double best_overall = std::numeric_limits<double>::infinity();
  Bitstring best_overall_original;

  for (int j = 0; j < cfg.max_iters; ++j) {
    NdarIteration it;
    it.iteration = j;
    it.frame_gauge = cumulative;
    it.attractor_energy = energy(frame, attractor);
    if (j > 0 && it.attractor_energy != trace.iterations.back().best_energy)
      throw Error("greedy chaining invariant violated at iteration " +
                  std::to_string(j));

    IterationSamples samples = optimizer(frame, j);
    if (int(samples.bitstrings.size()) < cfg.samples_per_iter)
      throw Error("optimizer returned fewer than M samples at iteration " +
                  std::to_string(j));
    if (samples.energies.size() != samples.bitstrings.size())
      throw Error("optimizer sample/energy length mismatch");

    int best_idx = 0;
    double best_e = samples.energies[0];
    double mean_e = 0.0;
    for (std::size_t i = 0; i < samples.energies.size(); ++i) {
      const double e = samples.energies[i];
      mean_e += e;
      if (e < best_e ||
          (e == best_e && samples.bitstrings[i] < samples.bitstrings[best_idx])) {
        best_e = e;
        best_idx = int(i);
      }
    }
    mean_e /= double(samples.energies.size());

    it.best_energy = best_e;
    it.mean_energy = mean_e;
    it.best_bitstring = samples.bitstrings[best_idx];
    it.sample_energies = samples.energies;
    if (keep_samples) it.samples = samples.bitstrings;
    trace.total_samples += cfg.samples_per_iter;

    const Bitstring best_original = to_original_frame(it.best_bitstring, cumulative);
    if (best_e < best_overall) {
      best_overall = best_e;
      best_overall_original = best_original;
    }
    // Frame consistency: the remapped solution evaluates identically in the
    // original frame.
    if (std::abs(energy(H0, best_original) - best_e) > 1e-9)
      throw Error("frame consistency violated at iteration " + std::to_string(j));

    // Step 4 state, recorded whether or not we continue.
    const Bitstring gauge_step = it.best_bitstring ^ attractor;
    it.gauge_applied = gauge_step;
    cumulative = cumulative.composed_with(gauge_step);
    it.cumulative_gauge = cumulative;
    trace.iterations.push_back(std::move(it));

    if (termination_check(trace, cfg.termination, cfg.max_iters,
                          cfg.termination_epsilon))
      break;
    frame = gauge_transform(frame, GaugeMask(gauge_step));
  }
  trace.terminated_by_rule = int(trace.iterations.size()) < cfg.max_iters;

  trace.final_gauge = trace.iterations.back().cumulative_gauge;
  trace.final_best.bitstring = best_overall_original;
  trace.final_best.energy = best_overall;
  return trace;
}

}  // namespace ndar
