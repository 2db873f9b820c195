#pragma once

// Execution backends: noiseless statevector simulation, an exact
// density-matrix channel oracle for tiny n, and quantum-trajectory sampling
// under per-gate amplitude damping.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <thread>
#include <vector>

#include "ndar/circuit.hpp"
#include "ndar/common.hpp"
#include "ndar/ising.hpp"

namespace ndar {

inline constexpr int kStatevectorCap = 26;
inline constexpr int kDensityCap = 8;

/// Per-gate-class amplitude damping rates plus the attractor designation.
/// Damping is defined toward |0> per qubit and conjugated by X wherever the
/// attractor bit is 1, so the configured attractor is the noise fixed point.
/// Attractor bits refer to logical qubits; the simulators track the SWAP
/// permutation to find the right chain position.
struct NoiseModel {
  double gamma_1q = 0.0;
  double gamma_2q = 0.0;
  Bitstring attractor;  // empty means |0...0>

  void validate() const {
    if (gamma_1q < 0.0 || gamma_1q > 1.0 || gamma_2q < 0.0 || gamma_2q > 1.0)
      throw ConfigError("damping probabilities must lie in [0,1]");
  }

  bool noiseless() const { return gamma_1q == 0.0 && gamma_2q == 0.0; }

  int attractor_bit(int logical_qubit) const {
    return attractor.size() ? attractor[logical_qubit] : 0;
  }

  /// Default strong-noise setting used for the Appendix-scale replication
  /// runs; strengths are configuration, not constants.
  static NoiseModel strong_damping() {
    NoiseModel nm;
    nm.gamma_1q = 0.02;
    nm.gamma_2q = 0.10;
    return nm;
  }
};

struct SampleBatch {
  int shots = 0;
  std::vector<Bitstring> bitstrings;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Statevector
// ---------------------------------------------------------------------------

namespace detail {

using cplx = std::complex<double>;

class StateVector {
 public:
  explicit StateVector(int n) : n_(n), amps_(std::size_t(1) << n) {}

  int n() const { return n_; }
  std::size_t dim() const { return amps_.size(); }
  const std::vector<cplx>& amps() const { return amps_; }

  void init_plus() {
    const double a = 1.0 / std::sqrt(double(dim()));
    std::fill(amps_.begin(), amps_.end(), cplx(a, 0.0));
  }

  void init_basis(std::uint64_t index) {
    std::fill(amps_.begin(), amps_.end(), cplx(0.0, 0.0));
    amps_[index] = 1.0;
  }

  /// Fused exp(-i(theta/2) ZZ) then SWAP on qubits a,b.
  void apply_rzz_swap(int a, int b, double theta) {
    if (a > b) std::swap(a, b);
    const cplx same = std::polar(1.0, -0.5 * theta);   // 00 and 11
    const cplx cross = std::polar(1.0, 0.5 * theta);   // 01 and 10, then swapped
    const std::size_t ma = std::size_t(1) << a;
    const std::size_t mb = std::size_t(1) << b;
    for (std::size_t hi = 0; hi < dim(); hi += 2 * mb)
      for (std::size_t mid = 0; mid < mb; mid += 2 * ma)
        for (std::size_t lo = 0; lo < ma; ++lo) {
          const std::size_t i00 = hi + mid + lo;
          const std::size_t i01 = i00 | ma;
          const std::size_t i10 = i00 | mb;
          const std::size_t i11 = i00 | ma | mb;
          amps_[i00] *= same;
          amps_[i11] *= same;
          const cplx t = amps_[i01] * cross;
          amps_[i01] = amps_[i10] * cross;
          amps_[i10] = t;
        }
  }

  /// exp(-i beta X) on qubit q.
  void apply_rx(int q, double beta) {
    const double c = std::cos(beta);
    const cplx is(0.0, -std::sin(beta));
    const std::size_t m = std::size_t(1) << q;
    for (std::size_t hi = 0; hi < dim(); hi += 2 * m)
      for (std::size_t lo = 0; lo < m; ++lo) {
        const std::size_t i0 = hi + lo;
        const std::size_t i1 = i0 | m;
        const cplx a0 = amps_[i0];
        const cplx a1 = amps_[i1];
        amps_[i0] = c * a0 + is * a1;
        amps_[i1] = is * a0 + c * a1;
      }
  }

  /// exp(-i(theta/2) Z) on qubit q.
  void apply_rz(int q, double theta) {
    const cplx p0 = std::polar(1.0, -0.5 * theta);
    const cplx p1 = std::polar(1.0, 0.5 * theta);
    const std::size_t m = std::size_t(1) << q;
    for (std::size_t hi = 0; hi < dim(); hi += 2 * m)
      for (std::size_t lo = 0; lo < m; ++lo) {
        const std::size_t i0 = hi + lo;
        amps_[i0] *= p0;
        amps_[i0 | m] *= p1;
      }
  }

  void apply_gate(const Gate& g) {
    switch (g.kind) {
      case GateKind::RzzSwap:
        apply_rzz_swap(g.q0, g.q1, g.theta);
        break;
      case GateKind::Mix:
        apply_rx(g.q0, g.theta);
        break;
      case GateKind::Rz:
        apply_rz(g.q0, g.theta);
        break;
      case GateKind::RxHalf:
        apply_rx(g.q0, (g.theta >= 0 ? 1.0 : -1.0) * 0.7853981633974483);
        break;
    }
  }

  double prob_of_bit(int q, int value) const {
    const std::size_t m = std::size_t(1) << q;
    double p1 = 0.0;
    for (std::size_t hi = 0; hi < dim(); hi += 2 * m)
      for (std::size_t lo = 0; lo < m; ++lo)
        p1 += std::norm(amps_[hi + lo + m]);
    return value ? p1 : 1.0 - p1;
  }

  double norm_sq() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
  }

  /// Amplitude-damping trajectory branch on qubit q with fixed point
  /// |target>, using `u` as the uniform draw. Renormalizes in place.
  void damp_trajectory(int q, double gamma, int target_bit, double u) {
    if (gamma == 0.0) return;
    const int excited = 1 - target_bit;
    const double p_exc = prob_of_bit(q, excited);
    const double p_jump = gamma * p_exc;
    const std::size_t m = std::size_t(1) << q;
    if (u < p_jump) {
      // K1 branch: excited population transferred to the target state.
      const double inv = 1.0 / std::sqrt(p_exc);
      for (std::size_t hi = 0; hi < dim(); hi += 2 * m)
        for (std::size_t lo = 0; lo < m; ++lo) {
          const std::size_t i0 = hi + lo;
          const std::size_t i1 = i0 | m;
          const std::size_t src = excited ? i1 : i0;
          const std::size_t dst = excited ? i0 : i1;
          amps_[dst] = amps_[src] * inv;
          amps_[src] = 0.0;
        }
    } else {
      // K0 branch: excited amplitudes shrink by sqrt(1-gamma).
      const double shrink = std::sqrt(1.0 - gamma);
      const double inv = 1.0 / std::sqrt(1.0 - p_jump);
      for (std::size_t hi = 0; hi < dim(); hi += 2 * m)
        for (std::size_t lo = 0; lo < m; ++lo) {
          const std::size_t i0 = hi + lo;
          const std::size_t i1 = i0 | m;
          const std::size_t exc = excited ? i1 : i0;
          const std::size_t grd = excited ? i0 : i1;
          amps_[exc] *= shrink * inv;
          amps_[grd] *= inv;
        }
    }
  }

  /// Single computational-basis sample by inverse CDF.
  std::uint64_t measure(Rng& rng) const {
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) {
      acc += std::norm(amps_[i]);
      if (u < acc) return i;
    }
    return dim() - 1;
  }

 private:
  int n_;
  std::vector<cplx> amps_;
};

/// Maps a measured physical-position index into the logical frame using the
/// final permutation (permutation[pos] = logical qubit at chain position pos).
inline Bitstring unwind_permutation(std::uint64_t phys_index,
                                    const std::vector<int>& permutation) {
  const int n = int(permutation.size());
  Bitstring logical(n);
  for (int pos = 0; pos < n; ++pos)
    logical[permutation[pos]] = (phys_index >> pos) & 1;
  return logical;
}

/// Replays the permutation evolution alongside the gates: perm[pos] is the
/// logical qubit at position pos before the next gate.
inline std::vector<int> initial_permutation(const GateList& gl) {
  std::vector<int> perm = gl.permutation;
  for (auto it = gl.gates.rbegin(); it != gl.gates.rend(); ++it)
    if (it->kind == GateKind::RzzSwap) std::swap(perm[it->q0], perm[it->q1]);
  return perm;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Noiseless statevector sampling
// ---------------------------------------------------------------------------

/// Exact probability vector over logical-frame bitstring indices after
/// noiseless evolution from |+>^n.
inline std::vector<double> noiseless_probabilities(const GateList& gl) {
  if (gl.n > kStatevectorCap)
    throw CapacityError("statevector capped at n=" +
                        std::to_string(kStatevectorCap));
  detail::StateVector sv(gl.n);
  sv.init_plus();
  for (const auto& g : gl.gates) sv.apply_gate(g);
  std::vector<double> probs(sv.dim(), 0.0);
  for (std::size_t i = 0; i < sv.dim(); ++i) {
    const auto logical = detail::unwind_permutation(i, gl.permutation);
    probs[logical.to_index()] += std::norm(sv.amps()[i]);
  }
  return probs;
}

inline SampleBatch sample_from_probabilities(const std::vector<double>& probs,
                                             int n, int shots,
                                             std::uint64_t seed) {
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());
  Rng rng(seed);
  SampleBatch batch;
  batch.shots = shots;
  batch.seed = seed;
  batch.bitstrings.reserve(shots);
  for (int s = 0; s < shots; ++s) {
    const double u = rng.next_double() * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::uint64_t idx = std::uint64_t(it - cdf.begin());
    batch.bitstrings.push_back(
        Bitstring::from_index(std::min(idx, std::uint64_t(probs.size() - 1)), n));
  }
  return batch;
}

/// Exact statevector evolution from |+>^n, permutation unwound so outputs
/// are logical-frame bitstrings. Deterministic given seed.
inline SampleBatch simulate_noiseless(const GateList& gl, int shots,
                                      std::uint64_t seed) {
  return sample_from_probabilities(noiseless_probabilities(gl), gl.n, shots,
                                   seed);
}

// ---------------------------------------------------------------------------
// Density-matrix oracle (n <= 8)
// ---------------------------------------------------------------------------

namespace detail {

/// Dense density matrix evolved exactly under gates + damping channels.
/// rho is stored as a 2^n x 2^n row-major complex matrix.
class DensityMatrix {
 public:
  explicit DensityMatrix(int n) : n_(n), dim_(std::size_t(1) << n),
                                  rho_(dim_ * dim_) {}

  void init_plus() {
    const double v = 1.0 / double(dim_);
    std::fill(rho_.begin(), rho_.end(), cplx(v, 0.0));
  }

  /// rho -> U rho U^dag where U acts as `apply` on a statevector. `apply` is
  /// called on every column, then on every row's conjugate.
  void apply_unitary(const std::function<void(StateVector&)>& apply) {
    StateVector scratch(n_);
    std::vector<cplx>& s = mutable_amps(scratch);
    // Columns: rho[:, c]
    for (std::size_t c = 0; c < dim_; ++c) {
      for (std::size_t r = 0; r < dim_; ++r) s[r] = rho_[r * dim_ + c];
      apply(scratch);
      for (std::size_t r = 0; r < dim_; ++r) rho_[r * dim_ + c] = s[r];
    }
    // Rows: rho[r, :] -> conj(U rho[r,:]^*)
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t c = 0; c < dim_; ++c)
        s[c] = std::conj(rho_[r * dim_ + c]);
      apply(scratch);
      for (std::size_t c = 0; c < dim_; ++c)
        rho_[r * dim_ + c] = std::conj(s[c]);
    }
  }

  /// Amplitude damping channel on qubit q with fixed point |target>:
  /// rho -> K0 rho K0^dag + K1 rho K1^dag.
  void damp(int q, double gamma, int target_bit) {
    if (gamma == 0.0) return;
    const double k = std::sqrt(1.0 - gamma);
    const std::size_t m = std::size_t(1) << q;
    const int excited = 1 - target_bit;
    for (std::size_t r = 0; r < dim_; ++r) {
      const bool re = ((r >> q) & 1) == std::size_t(excited);
      for (std::size_t c = 0; c < dim_; ++c) {
        const bool ce = ((c >> q) & 1) == std::size_t(excited);
        if (!re && !ce) continue;  // handled via the paired ee entry below
        if (re && ce) continue;    // handled below
        rho_[r * dim_ + c] *= k;   // one excited index: coherence shrinks
      }
    }
    // Populations: rho_tt += gamma * rho_ee ; rho_ee *= (1-gamma), applied
    // jointly over the other qubits' indices.
    for (std::size_t r = 0; r < dim_; ++r) {
      if (((r >> q) & 1) != std::size_t(excited)) continue;
      for (std::size_t c = 0; c < dim_; ++c) {
        if (((c >> q) & 1) != std::size_t(excited)) continue;
        const std::size_t rt = r ^ m;
        const std::size_t ct = c ^ m;
        rho_[rt * dim_ + ct] += gamma * rho_[r * dim_ + c];
        rho_[r * dim_ + c] *= 1.0 - gamma;
      }
    }
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(dim_);
    for (std::size_t i = 0; i < dim_; ++i) d[i] = rho_[i * dim_ + i].real();
    return d;
  }

 private:
  static std::vector<cplx>& mutable_amps(StateVector& sv) {
    return const_cast<std::vector<cplx>&>(sv.amps());
  }
  int n_;
  std::size_t dim_;
  std::vector<cplx> rho_;
};

}  // namespace detail

/// Exact noisy outcome probabilities over logical-frame indices: after every
/// gate, the single-qubit damping channel (gamma_1q for single-qubit gates,
/// gamma_2q independently on both qubits of a fused two-qubit gate) is
/// applied to each touched qubit.
inline std::vector<double> simulate_density_oracle(const GateList& gl,
                                                   const NoiseModel& noise) {
  noise.validate();
  if (gl.n > kDensityCap)
    throw CapacityError("density oracle capped at n=" +
                        std::to_string(kDensityCap));
  if (noise.attractor.size() && int(noise.attractor.size()) != gl.n)
    throw DimensionError("attractor length mismatch");
  detail::DensityMatrix rho(gl.n);
  rho.init_plus();
  std::vector<int> perm = detail::initial_permutation(gl);
  for (const auto& g : gl.gates) {
    rho.apply_unitary([&](detail::StateVector& sv) { sv.apply_gate(g); });
    if (g.kind == GateKind::RzzSwap) std::swap(perm[g.q0], perm[g.q1]);
    const bool two_qubit = g.kind == GateKind::RzzSwap;
    const double gamma = two_qubit ? noise.gamma_2q : noise.gamma_1q;
    rho.damp(g.q0, gamma, noise.attractor_bit(perm[g.q0]));
    if (two_qubit) rho.damp(g.q1, gamma, noise.attractor_bit(perm[g.q1]));
  }
  const auto diag = rho.diagonal();
  std::vector<double> probs(diag.size(), 0.0);
  for (std::size_t i = 0; i < diag.size(); ++i)
    probs[detail::unwind_permutation(i, gl.permutation).to_index()] += diag[i];
  return probs;
}

// ---------------------------------------------------------------------------
// Quantum trajectories
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t run_one_trajectory(const GateList& gl,
                                        const NoiseModel& noise,
                                        const std::vector<int>& init_perm,
                                        StateVector& sv, Rng& rng) {
  sv.init_plus();
  std::vector<int> perm = init_perm;
  for (const auto& g : gl.gates) {
    sv.apply_gate(g);
    if (g.kind == GateKind::RzzSwap) std::swap(perm[g.q0], perm[g.q1]);
    const bool two_qubit = g.kind == GateKind::RzzSwap;
    const double gamma = two_qubit ? noise.gamma_2q : noise.gamma_1q;
    if (gamma > 0.0) {
      sv.damp_trajectory(g.q0, gamma, noise.attractor_bit(perm[g.q0]),
                         rng.next_double());
      if (two_qubit)
        sv.damp_trajectory(g.q1, gamma, noise.attractor_bit(perm[g.q1]),
                           rng.next_double());
    }
  }
  return sv.measure(rng);
}

}  // namespace detail

/// Stochastic Kraus unraveling on a statevector, one computational-basis
/// sample per trajectory. Shot k uses the RNG stream derived from
/// (seed, k), so results are identical regardless of the degree of
/// parallelism. Outputs are logical-frame bitstrings.
inline SampleBatch simulate_trajectories(const GateList& gl,
                                         const NoiseModel& noise, int shots,
                                         std::uint64_t seed, int jobs = 1) {
  noise.validate();
  if (gl.n > kStatevectorCap)
    throw CapacityError("statevector capped at n=" +
                        std::to_string(kStatevectorCap));
  if (noise.attractor.size() && int(noise.attractor.size()) != gl.n)
    throw DimensionError("attractor length mismatch");
  if (noise.noiseless()) return simulate_noiseless(gl, shots, seed);

  const std::vector<int> init_perm = detail::initial_permutation(gl);
  SampleBatch batch;
  batch.shots = shots;
  batch.seed = seed;
  batch.bitstrings.resize(shots);

  auto worker = [&](int begin, int end) {
    detail::StateVector sv(gl.n);
    for (int s = begin; s < end; ++s) {
      Rng rng(Rng::derive(seed, std::uint64_t(s)));
      const std::uint64_t phys =
          detail::run_one_trajectory(gl, noise, init_perm, sv, rng);
      batch.bitstrings[s] = detail::unwind_permutation(phys, gl.permutation);
    }
  };

  if (jobs <= 1 || shots < 2) {
    worker(0, shots);
  } else {
    const int threads = std::min(jobs, shots);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      const int begin = int(std::int64_t(shots) * t / threads);
      const int end = int(std::int64_t(shots) * (t + 1) / threads);
      pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Cost estimation
// ---------------------------------------------------------------------------

struct CostEstimate {
  double mean = 0.0;
  double min = 0.0;
  std::vector<double> energies;  // sorted ascending

  /// Mean over the best (lowest-energy) ceil-free top-q fraction; q in (0,1].
  double quantile_mean(double q) const {
    if (q <= 0.0 || q > 1.0) throw ConfigError("quantile fraction must be in (0,1]");
    const std::size_t k = std::max<std::size_t>(
        1, std::size_t(std::floor(q * double(energies.size()) + 1e-9)));
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += energies[i];
    return s / double(k);
  }
};

/// Mean/min/top-quantile energies of a batch evaluated in the given frame.
inline CostEstimate estimate_cost(const SampleBatch& batch,
                                  const IsingHamiltonian& frame) {
  if (batch.bitstrings.empty()) throw EmptyInputError("empty sample batch");
  CostEstimate est;
  est.energies.reserve(batch.bitstrings.size());
  for (const auto& x : batch.bitstrings) est.energies.push_back(energy(frame, x));
  std::sort(est.energies.begin(), est.energies.end());
  est.min = est.energies.front();
  est.mean = std::accumulate(est.energies.begin(), est.energies.end(), 0.0) /
             double(est.energies.size());
  return est;
}

}  // namespace ndar
