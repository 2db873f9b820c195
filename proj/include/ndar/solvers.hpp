#pragma once

// Reference solvers: exhaustive ground-state search (Gray-code incremental),
// single-spin-flip Metropolis simulated annealing, and uniform random
// sampling baselines.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <vector>

#include "ndar/common.hpp"
#include "ndar/ising.hpp"

namespace ndar {

struct GroundStateResult {
  double energy = 0.0;
  std::vector<Bitstring> minimizers;
  bool exact = false;
};

struct AnnealSchedule {
  int sweeps = 1000;
  double beta_start = 0.1;
  double beta_end = 5.0;
  int replicas = 32;
  std::uint64_t seed = 0;

  void validate() const {
    if (sweeps < 1) throw ConfigError("anneal: sweeps must be >= 1");
    if (replicas < 1) throw ConfigError("anneal: replicas must be >= 1");
    if (!(beta_start > 0.0) || beta_end < beta_start)
      throw ConfigError("anneal: require beta_end >= beta_start > 0");
  }
};

namespace detail {

/// Dense adjacency view of a Hamiltonian for O(degree) flip deltas.
struct DenseIsing {
  int n;
  std::vector<double> h;
  std::vector<std::vector<std::pair<int, double>>> adj;

  explicit DenseIsing(const IsingHamiltonian& H)
      : n(H.n()), h(H.n(), 0.0), adj(H.n()) {
    for (const auto& [i, hi] : H.linear()) h[i] = hi;
    for (const auto& [ij, J] : H.quadratic()) {
      adj[ij.first].emplace_back(ij.second, J);
      adj[ij.second].emplace_back(ij.first, J);
    }
  }

  double full_energy(const std::vector<int>& s) const {
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      e += h[i] * s[i];
      for (const auto& [j, J] : adj[i])
        if (j > i) e += J * s[i] * s[j];
    }
    return e;
  }

  /// Energy change from flipping spin i.
  double flip_delta(const std::vector<int>& s, int i) const {
    double field = h[i];
    for (const auto& [j, J] : adj[i]) field += J * s[j];
    return -2.0 * s[i] * field;
  }
};

}  // namespace detail

inline constexpr int kBruteForceCap = 24;

/// Exhaustive ground-state search over all 2^n states, visiting them in
/// Gray-code order so each step is a single spin flip with an O(degree)
/// energy update. Returns every minimizer encountered (exact energy ties).
inline GroundStateResult brute_force(const IsingHamiltonian& H,
                                     int cap = kBruteForceCap) {
  const int n = H.n();
  if (n > cap)
    throw CapacityError("brute force capped at n=" + std::to_string(cap) +
                        "; use simulated annealing for larger instances");
  detail::DenseIsing dense(H);
  std::vector<int> s(n, 1);  // state 0...0
  std::uint64_t state = 0;
  double e = dense.full_energy(s);

  GroundStateResult result;
  result.exact = true;
  result.energy = e;
  result.minimizers.push_back(Bitstring::from_index(0, n));

  const std::uint64_t total = std::uint64_t(1) << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const int i = std::countr_zero(k);
    e += dense.flip_delta(s, i);
    s[i] = -s[i];
    state ^= std::uint64_t(1) << i;
    if (e < result.energy) {
      result.energy = e;
      result.minimizers.clear();
      result.minimizers.push_back(Bitstring::from_index(state, n));
    } else if (e == result.energy) {
      result.minimizers.push_back(Bitstring::from_index(state, n));
    }
  }
  std::sort(result.minimizers.begin(), result.minimizers.end(),
            [](const Bitstring& a, const Bitstring& b) {
              return a.to_index() < b.to_index();
            });
  return result;
}

/// Single-spin-flip Metropolis with a linear beta ramp over sweeps. Returns
/// the best record seen per replica, ordered by replica index. Per-replica
/// seeds are derived from the schedule seed so the result is independent of
/// how replicas are scheduled.
inline std::vector<EnergyRecord> simulated_annealing(
    const IsingHamiltonian& H, const AnnealSchedule& schedule,
    const Bitstring* initial = nullptr) {
  schedule.validate();
  if (initial && int(initial->size()) != H.n())
    throw DimensionError("anneal: initial state length mismatch");
  const int n = H.n();
  detail::DenseIsing dense(H);

  std::vector<EnergyRecord> best(schedule.replicas);
  for (int r = 0; r < schedule.replicas; ++r) {
    Rng rng(Rng::derive(schedule.seed, std::uint64_t(r)));
    Bitstring x = initial ? *initial : Bitstring::random(n, rng);
    std::vector<int> s(n);
    for (int i = 0; i < n; ++i) s[i] = x.spin(i);
    double e = dense.full_energy(s);
    Bitstring best_x = x;
    double best_e = e;
    for (int sweep = 0; sweep < schedule.sweeps; ++sweep) {
      const double frac =
          schedule.sweeps > 1 ? double(sweep) / double(schedule.sweeps - 1) : 1.0;
      const double beta =
          schedule.beta_start + frac * (schedule.beta_end - schedule.beta_start);
      for (int i = 0; i < n; ++i) {
        const double delta = dense.flip_delta(s, i);
        if (delta <= 0.0 || rng.next_double() < std::exp(-beta * delta)) {
          s[i] = -s[i];
          x[i] ^= 1;
          e += delta;
          if (e < best_e) {
            best_e = e;
            best_x = x;
          }
        }
      }
    }
    best[r] = EnergyRecord{best_x, best_e, false, 0.0};
  }
  return best;
}

/// M i.i.d. uniform bitstrings with their energies (the random baseline).
inline std::vector<EnergyRecord> random_sampling(const IsingHamiltonian& H,
                                                 int samples,
                                                 std::uint64_t seed) {
  if (samples < 1) throw ConfigError("random sampling requires M >= 1");
  Rng rng(seed);
  std::vector<EnergyRecord> out(samples);
  for (int m = 0; m < samples; ++m) {
    Bitstring x = Bitstring::random(H.n(), rng);
    out[m] = EnergyRecord{x, energy(H, x), false, 0.0};
  }
  return out;
}

}  // namespace ndar
