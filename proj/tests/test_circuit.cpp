// Tests for the SWAP-network QAOA circuit builder: brick pattern coverage,
// chain reversal, angle wiring, native gate counting, and ordering sampling.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "ndar/circuit.hpp"
#include "ndar/ising.hpp"

using namespace ndar;

namespace {

IsingHamiltonian complete_graph(int n, double J = 1.0) {
  IsingHamiltonian H(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) H.set_quadratic(i, j, J);
  return H;
}

}  // namespace

TEST_CASE("phase network visits every logical pair exactly once") {
  for (int n : {2, 3, 4, 5, 8, 11}) {
    auto H = complete_graph(n);
    auto gl = build_phase_network(H, 0.3, GateOrdering::identity(n));
    // n brick layers over a chain of n sites -> n*(n-1)/2 fused gates.
    CHECK(int(gl.gates.size()) == n * (n - 1) / 2);

    // Replay the network tracking which logical pair each gate acts on.
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::set<std::pair<int, int>> met;
    for (const auto& g : gl.gates) {
      REQUIRE(g.kind == GateKind::RzzSwap);
      REQUIRE(g.q1 == g.q0 + 1);
      int a = perm[g.q0], b = perm[g.q1];
      if (a > b) std::swap(a, b);
      CHECK(met.insert({a, b}).second);  // each pair at most once
      std::swap(perm[g.q0], perm[g.q1]);
    }
    CHECK(int(met.size()) == n * (n - 1) / 2);  // ... and at least once
    CHECK(perm == gl.permutation);
  }
}

TEST_CASE("phase network reverses the chain order") {
  for (int n : {2, 3, 6, 9}) {
    auto H = complete_graph(n);
    auto gl = build_phase_network(H, 0.1, GateOrdering::identity(n));
    std::vector<int> reversed(n);
    for (int i = 0; i < n; ++i) reversed[i] = n - 1 - i;
    CHECK(gl.permutation == reversed);
  }
}

TEST_CASE("first brick layer pairs even positions first") {
  auto H = complete_graph(6);
  auto gl = build_phase_network(H, 0.2, GateOrdering::identity(6));
  CHECK(gl.gates[0].q0 == 0);
  CHECK(gl.gates[1].q0 == 2);
  CHECK(gl.gates[2].q0 == 4);
  // Second layer is the odd bricks.
  CHECK(gl.gates[3].q0 == 1);
  CHECK(gl.gates[4].q0 == 3);
}

TEST_CASE("fused gate angles are 2*J*gamma for the logical pair") {
  IsingHamiltonian H(4);
  H.set_quadratic(0, 1, 1.0);
  H.set_quadratic(0, 2, -1.0);
  H.set_quadratic(0, 3, 1.0);
  H.set_quadratic(1, 2, 1.0);
  H.set_quadratic(1, 3, -1.0);
  H.set_quadratic(2, 3, 1.0);
  const double gamma = 0.37;
  auto gl = build_phase_network(H, gamma, GateOrdering::identity(4));
  std::vector<int> perm = {0, 1, 2, 3};
  for (const auto& g : gl.gates) {
    int a = perm[g.q0], b = perm[g.q1];
    CHECK(g.theta == doctest::Approx(2.0 * H.quadratic_weight(a, b) * gamma));
    std::swap(perm[g.q0], perm[g.q1]);
  }
}

TEST_CASE("zero-coupling pairs still emit an angle-0 fused gate") {
  IsingHamiltonian H(4);
  H.set_quadratic(0, 1, 1.0);  // only one real coupling
  auto gl = build_phase_network(H, 0.5, GateOrdering::identity(4));
  CHECK(int(gl.gates.size()) == 6);
  int zero_angles = 0;
  for (const auto& g : gl.gates) zero_angles += g.theta == 0.0;
  CHECK(zero_angles == 5);
}

TEST_CASE("non-identity ordering changes which pair a gate touches") {
  IsingHamiltonian H(3);
  H.set_quadratic(0, 1, 2.0);
  H.set_quadratic(0, 2, -3.0);
  H.set_quadratic(1, 2, 5.0);
  GateOrdering ord;
  ord.ordering_id = 1;
  ord.assignment = {2, 0, 1};  // logical 0 sits at chain position 2
  auto gl = build_phase_network(H, 1.0, ord);
  // Chain initially holds logicals [1, 2, 0]; first brick gate acts on (1,2).
  CHECK(gl.gates[0].theta == doctest::Approx(2.0 * 5.0));
}

TEST_CASE("ordering validation rejects non-bijections") {
  GateOrdering bad;
  bad.assignment = {0, 0, 1};
  CHECK_THROWS_AS(bad.validate(3), ConfigError);
  GateOrdering wrong_size;
  wrong_size.assignment = {0, 1};
  CHECK_THROWS_AS(wrong_size.validate(3), ConfigError);
}

TEST_CASE("full QAOA circuit layer structure") {
  auto H = complete_graph(5);
  QaoaParams params({0.3, -0.2}, {0.1, 0.4});
  auto gl = build_qaoa_circuit(H, params, GateOrdering::identity(5));
  const int pairs = 5 * 4 / 2;
  CHECK(gl.count(GateKind::RzzSwap) == 2 * pairs);
  CHECK(gl.count(GateKind::Mix) == 2 * 5);
  CHECK(gl.count(GateKind::Rz) == 0);
  // Mixer angle per layer matches beta_l.
  int seen_layer = 0;
  for (const auto& g : gl.gates)
    if (g.kind == GateKind::Mix) {
      CHECK(g.theta == params.betas[seen_layer / 5]);
      ++seen_layer;
    }
  CHECK(seen_layer == 10);
  // Two full networks restore the original chain order.
  std::vector<int> ident(5);
  std::iota(ident.begin(), ident.end(), 0);
  CHECK(gl.permutation == ident);
}

TEST_CASE("linear terms produce RZ gates on the right chain position") {
  IsingHamiltonian H(3);
  H.set_quadratic(0, 1, 1.0);
  H.set_quadratic(1, 2, 1.0);
  H.set_linear(2, 0.7);
  QaoaParams params({0.5}, {0.2});
  auto gl = build_qaoa_circuit(H, params, GateOrdering::identity(3));
  // One RZ, angle 2*h*gamma, on the post-network position of logical 2.
  int rz_count = 0;
  for (const auto& g : gl.gates)
    if (g.kind == GateKind::Rz) {
      ++rz_count;
      CHECK(g.theta == doctest::Approx(2.0 * 0.7 * 0.5));
      // After the reversal the chain holds [2, 1, 0], so logical 2 is at 0.
      CHECK(g.q0 == 0);
    }
  CHECK(rz_count == 1);
}

TEST_CASE("params constructor validates shapes") {
  CHECK_THROWS_AS(QaoaParams({}, {}), ConfigError);
  CHECK_THROWS_AS(QaoaParams({0.1, 0.2}, {0.1}), ConfigError);
}

TEST_CASE("native gate counts for a dense n=82 p=1 circuit") {
  auto H = generate_sk(82, 11);
  REQUIRE(int(H.quadratic().size()) == 82 * 81 / 2);
  QaoaParams params({0.3}, {0.2});
  auto gl = build_qaoa_circuit(H, params, GateOrdering::identity(82));
  auto c = native_gate_counts(gl);
  CHECK(c.iswap == 9963);  // 3 * C(82,2)
  const long long single = c.rx + c.rz;
  CHECK(single == 4LL * 3321 + 5LL * 3321 + 2LL * 82 + 3LL * 82);
  CHECK(single >= 28000);
  CHECK(single <= 32000);
}

TEST_CASE("native counts per gate kind") {
  GateList gl;
  gl.n = 2;
  gl.gates = {Gate{GateKind::RzzSwap, 0.1, 0, 1}, Gate{GateKind::Mix, 0.2, 0, -1},
              Gate{GateKind::Rz, 0.3, 1, -1}, Gate{GateKind::RxHalf, 1.0, 0, -1}};
  auto c = native_gate_counts(gl);
  CHECK(c.iswap == 3);
  CHECK(c.rx == 4 + 2 + 1);
  CHECK(c.rz == 5 + 3 + 1);
}

TEST_CASE("sample_orderings yields distinct valid permutations, deterministic") {
  auto a = sample_orderings(6, 10, 123);
  auto b = sample_orderings(6, 10, 123);
  REQUIRE(a.size() == 10);
  std::set<std::vector<int>> uniq;
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].ordering_id == int(i));
    CHECK_NOTHROW(a[i].validate(6));
    CHECK(a[i].assignment == b[i].assignment);
    uniq.insert(a[i].assignment);
  }
  CHECK(uniq.size() == 10);
  auto c = sample_orderings(6, 10, 124);
  bool any_diff = false;
  for (size_t i = 0; i < a.size(); ++i)
    any_diff = any_diff || a[i].assignment != c[i].assignment;
  CHECK(any_diff);
}

TEST_CASE("sample_orderings capacity guard") {
  CHECK_THROWS_AS(sample_orderings(3, 7, 1), CapacityError);  // 3! = 6 < 7
  CHECK_NOTHROW(sample_orderings(3, 6, 1));
  CHECK_THROWS_AS(sample_orderings(4, 0, 1), ConfigError);
}

TEST_CASE("dump_circuit format") {
  IsingHamiltonian H(2);
  H.set_quadratic(0, 1, 1.0);
  QaoaParams params({0.5}, {0.25});
  auto gl = build_qaoa_circuit(H, params, GateOrdering::identity(2));
  std::ostringstream os;
  dump_circuit(gl, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line.rfind("RZZ_SWAP 1 0 1", 0) == 0);
  std::getline(is, line);
  CHECK(line.rfind("MIX 0.25 0", 0) == 0);
  std::getline(is, line);
  CHECK(line.rfind("MIX 0.25 1", 0) == 0);
}
