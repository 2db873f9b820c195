#pragma once

// QAOA circuit construction for a linear chain: fused RZZ+SWAP brick-pattern
// network covering all pairs per phase layer, mixer layers, logical-to-chain
// orderings, and native gate counting for the iSWAP/RX/RZ gate set.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ndar/common.hpp"
#include "ndar/ising.hpp"

namespace ndar {

struct QaoaParams {
  std::vector<double> gammas;
  std::vector<double> betas;

  QaoaParams() = default;
  QaoaParams(std::vector<double> g, std::vector<double> b)
      : gammas(std::move(g)), betas(std::move(b)) {
    if (gammas.size() != betas.size() || gammas.empty())
      throw ConfigError("QAOA params require p >= 1 with len(gammas) == len(betas)");
  }

  int p() const { return int(gammas.size()); }
};

enum class GateKind : std::uint8_t {
  RzzSwap,  // exp(-i(theta/2) ZZ) followed by SWAP, adjacent chain positions
  Mix,      // exp(-i beta X) on one qubit
  Rz,       // exp(-i(theta/2) Z)
  RxHalf,   // RX(+-pi/2); theta carries the sign
};

struct Gate {
  GateKind kind;
  double theta;
  int q0;
  int q1;  // second chain position for RzzSwap, -1 otherwise
};

/// Initial logical-qubit -> chain-position permutation. A categorical
/// variable for the optimizer; inert without noise.
struct GateOrdering {
  int ordering_id = 0;
  std::vector<int> assignment;  // assignment[logical] = chain position

  static GateOrdering identity(int n) {
    GateOrdering g;
    g.assignment.resize(n);
    std::iota(g.assignment.begin(), g.assignment.end(), 0);
    return g;
  }

  void validate(int n) const {
    if (int(assignment.size()) != n)
      throw ConfigError("gate ordering size mismatch");
    std::vector<bool> seen(n, false);
    for (int pos : assignment) {
      if (pos < 0 || pos >= n || seen[pos])
        throw ConfigError("gate ordering is not a bijection");
      seen[pos] = true;
    }
  }
};

/// Compiled circuit. `permutation[pos]` is the logical qubit sitting at chain
/// position `pos` after all gates; one full phase network reverses the chain.
struct GateList {
  int n = 0;
  std::vector<Gate> gates;
  std::vector<int> permutation;

  int count(GateKind kind) const {
    int c = 0;
    for (const auto& g : gates) c += g.kind == kind;
    return c;
  }
};

namespace detail {

/// Appends one phase-separator network to `gates`, updating perm in place.
/// Brick pattern: even-pair layer (0,1),(2,3),... first, then odd,
/// alternating for n layers; after the sweep every logical pair has met
/// exactly once and the chain order is reversed. Zero-coupling pairs emit an
/// angle-0 fused gate so per-gate noise accounting stays uniform.
inline void append_phase_network(const IsingHamiltonian& H, double gamma,
                                 std::vector<int>& perm,
                                 std::vector<Gate>& gates) {
  const int n = H.n();
  for (int layer = 0; layer < n; ++layer) {
    for (int a = layer % 2; a + 1 < n; a += 2) {
      const int qi = perm[a];
      const int qj = perm[a + 1];
      const double J = H.quadratic_weight(qi, qj);
      gates.push_back(Gate{GateKind::RzzSwap, 2.0 * J * gamma, a, a + 1});
      std::swap(perm[a], perm[a + 1]);
    }
  }
}

}  // namespace detail

/// One phase-separator SWAP network with angle gamma. The fused gate
/// implements exp(-i(theta/2) Z(x)Z) * SWAP with theta = 2*J_ij*gamma, so the
/// whole network equals exp(-i gamma H) composed with the chain reversal.
inline GateList build_phase_network(const IsingHamiltonian& H, double gamma,
                                    const GateOrdering& ordering) {
  const int n = H.n();
  if (n < 2) throw ConfigError("phase network requires n >= 2");
  ordering.validate(n);
  GateList gl;
  gl.n = n;
  gl.permutation.assign(n, 0);
  for (int q = 0; q < n; ++q) gl.permutation[ordering.assignment[q]] = q;
  detail::append_phase_network(H, gamma, gl.permutation, gl.gates);
  return gl;
}

/// Full p-layer QAOA circuit: per layer, a phase network with gamma_l then a
/// mixer MIX(beta_l) on every qubit. The |+>^n initial state is a simulator
/// contract, not a gate. Linear fields, when present, contribute RZ gates
/// after each phase network.
inline GateList build_qaoa_circuit(const IsingHamiltonian& H,
                                   const QaoaParams& params,
                                   const GateOrdering& ordering) {
  const int n = H.n();
  if (n < 2) throw ConfigError("QAOA circuit requires n >= 2");
  ordering.validate(n);
  GateList gl;
  gl.n = n;
  gl.permutation.assign(n, 0);
  for (int q = 0; q < n; ++q) gl.permutation[ordering.assignment[q]] = q;
  for (int l = 0; l < params.p(); ++l) {
    detail::append_phase_network(H, params.gammas[l], gl.permutation, gl.gates);
    for (const auto& [i, h] : H.linear()) {
      // exp(-i gamma h Z_i): find the chain position currently holding i.
      for (int pos = 0; pos < n; ++pos)
        if (gl.permutation[pos] == i) {
          gl.gates.push_back(Gate{GateKind::Rz, 2.0 * h * params.gammas[l], pos, -1});
          break;
        }
    }
    for (int pos = 0; pos < n; ++pos)
      gl.gates.push_back(Gate{GateKind::Mix, params.betas[l], pos, -1});
  }
  return gl;
}

struct NativeGateCounts {
  long long iswap = 0;
  long long rx = 0;
  long long rz = 0;
};

/// Upper-bound native counts for the iSWAP + RX(+-pi/2) + RZ gate set: each
/// fused RZZ+SWAP costs 3 iSWAP, at most 4 RX and 5 RZ; a mixer rotation
/// decomposes as 2 RX(+-pi/2) + 3 RZ (Euler form), a bare RZ as 1 RZ.
inline NativeGateCounts native_gate_counts(const GateList& gl) {
  NativeGateCounts c;
  for (const auto& g : gl.gates) {
    switch (g.kind) {
      case GateKind::RzzSwap:
        c.iswap += 3;
        c.rx += 4;
        c.rz += 5;
        break;
      case GateKind::Mix:
        c.rx += 2;
        c.rz += 3;
        break;
      case GateKind::Rz:
        c.rz += 1;
        break;
      case GateKind::RxHalf:
        c.rx += 1;
        break;
    }
  }
  return c;
}

/// k distinct random logical->position permutations, deterministic given
/// seed; ordering_id is the position in the returned list.
inline std::vector<GateOrdering> sample_orderings(int n, int k,
                                                  std::uint64_t seed) {
  if (k < 1) throw ConfigError("ordering sample requires k >= 1");
  // n! distinct permutations exist; only guard small n where k could exceed it.
  double factorial = 1.0;
  for (int i = 2; i <= n && factorial <= 1e9; ++i) factorial *= i;
  if (factorial < double(k))
    throw CapacityError("requested more orderings than n! permutations");

  Rng rng(seed);
  std::vector<GateOrdering> out;
  std::vector<std::vector<int>> seen;
  while (int(out.size()) < k) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.next_below(std::uint64_t(i) + 1)]);
    if (std::find(seen.begin(), seen.end(), perm) != seen.end()) continue;
    seen.push_back(perm);
    GateOrdering g;
    g.ordering_id = int(out.size());
    g.assignment = std::move(perm);
    out.push_back(std::move(g));
  }
  return out;
}

/// Line-oriented dump `GATE theta q0 [q1]` for inspection and differential
/// testing (the CLI's --dump-circuit).
inline void dump_circuit(const GateList& gl, std::ostream& out) {
  for (const auto& g : gl.gates) {
    switch (g.kind) {
      case GateKind::RzzSwap:
        out << "RZZ_SWAP " << format_double(g.theta) << " " << g.q0 << " "
            << g.q1 << "\n";
        break;
      case GateKind::Mix:
        out << "MIX " << format_double(g.theta) << " " << g.q0 << "\n";
        break;
      case GateKind::Rz:
        out << "RZ " << format_double(g.theta) << " " << g.q0 << "\n";
        break;
      case GateKind::RxHalf:
        out << "RX_HALF " << format_double(g.theta) << " " << g.q0 << "\n";
        break;
    }
  }
}

}  // namespace ndar
