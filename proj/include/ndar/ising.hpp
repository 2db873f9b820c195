#pragma once

// Ising problem representation: Hamiltonians over n spins with linear and
// quadratic real weights, bitstring solutions, bitflip gauge transforms, and
// the line-oriented instance file format.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ndar/common.hpp"

namespace ndar {

// ---------------------------------------------------------------------------
// Bitstring
// ---------------------------------------------------------------------------

/// Length-n vector over {0,1}. Doubles as a candidate solution and as a
/// bitflip gauge. Spin convention: bit b maps to spin s = 1 - 2b, so |0> is
/// the +1 eigenstate of Z and |0...0> has all spins up.
struct Bitstring {
  std::vector<std::uint8_t> bits;

  Bitstring() = default;
  explicit Bitstring(std::size_t n) : bits(n, 0) {}
  Bitstring(std::initializer_list<std::uint8_t> init) : bits(init) {}

  std::size_t size() const { return bits.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits[i]; }
  std::uint8_t& operator[](std::size_t i) { return bits[i]; }

  int spin(std::size_t i) const { return 1 - 2 * int(bits[i]); }

  int popcount() const {
    int c = 0;
    for (auto b : bits) c += b;
    return c;
  }

  Bitstring operator^(const Bitstring& other) const {
    if (bits.size() != other.bits.size())
      throw DimensionError("bitstring XOR: length mismatch");
    Bitstring out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
      out.bits[i] = bits[i] ^ other.bits[i];
    return out;
  }

  Bitstring flipped() const {
    Bitstring out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) out.bits[i] = 1 - bits[i];
    return out;
  }

  bool operator==(const Bitstring& other) const = default;
  bool operator<(const Bitstring& other) const { return bits < other.bits; }

  /// Basis-state index with bit i at binary position i (little-endian).
  std::uint64_t to_index() const {
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
      idx |= std::uint64_t(bits[i]) << i;
    return idx;
  }

  static Bitstring from_index(std::uint64_t idx, std::size_t n) {
    Bitstring out(n);
    for (std::size_t i = 0; i < n; ++i) out.bits[i] = (idx >> i) & 1;
    return out;
  }

  /// Textual form, bit 0 first: "0110...".
  std::string str() const {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) s[i] = '1';
    return s;
  }

  static Bitstring from_str(const std::string& s) {
    Bitstring out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != '0' && s[i] != '1')
        throw ParseError("bitstring character must be 0 or 1", 1);
      out.bits[i] = s[i] == '1';
    }
    return out;
  }

  static Bitstring random(std::size_t n, Rng& rng) {
    Bitstring out(n);
    for (std::size_t i = 0; i < n; ++i)
      out.bits[i] = std::uint8_t(rng.next_u64() & 1);
    return out;
  }
};

inline int hamming_weight(const Bitstring& x) { return x.popcount(); }

// ---------------------------------------------------------------------------
// GaugeMask
// ---------------------------------------------------------------------------

/// Bitflip gauge y of P_y = (x) X_i^{y_i}. Composition is XOR; applying the
/// same mask twice is the identity. `provenance` records the constituent
/// masks composed so far (NDAR appends one per re-gauge step).
struct GaugeMask {
  Bitstring mask;
  std::vector<Bitstring> provenance;

  GaugeMask() = default;
  explicit GaugeMask(Bitstring m) : mask(std::move(m)) {
    provenance.push_back(mask);
  }
  static GaugeMask identity(std::size_t n) {
    GaugeMask g;
    g.mask = Bitstring(n);
    return g;
  }

  std::size_t size() const { return mask.size(); }

  GaugeMask composed_with(const Bitstring& next) const {
    GaugeMask out;
    out.mask = mask ^ next;
    out.provenance = provenance;
    out.provenance.push_back(next);
    return out;
  }
};

// ---------------------------------------------------------------------------
// IsingHamiltonian
// ---------------------------------------------------------------------------

/// H = sum_i h_i Z_i + sum_{i<j} J_ij Z_i Z_j, stored sparsely. Quadratic
/// keys are strictly ordered pairs; zero-weight terms are dropped at
/// construction so equality of term maps is well-defined.
class IsingHamiltonian {
 public:
  using PairKey = std::pair<int, int>;

  IsingHamiltonian() : n_(0) {}
  explicit IsingHamiltonian(int n) : n_(n) {
    if (n <= 0) throw ConfigError("qubit count must be positive");
  }

  int n() const { return n_; }
  const std::map<int, double>& linear() const { return linear_; }
  const std::map<PairKey, double>& quadratic() const { return quadratic_; }

  void set_linear(int i, double h) {
    check_index(i);
    if (!std::isfinite(h)) throw ConfigError("non-finite linear weight");
    if (h == 0.0)
      linear_.erase(i);
    else
      linear_[i] = h;
  }

  void set_quadratic(int i, int j, double w) {
    check_index(i);
    check_index(j);
    if (i == j) throw ConfigError("quadratic term requires i != j");
    if (i > j) std::swap(i, j);
    if (!std::isfinite(w)) throw ConfigError("non-finite quadratic weight");
    if (w == 0.0)
      quadratic_.erase({i, j});
    else
      quadratic_[{i, j}] = w;
  }

  double linear_weight(int i) const {
    auto it = linear_.find(i);
    return it == linear_.end() ? 0.0 : it->second;
  }

  double quadratic_weight(int i, int j) const {
    if (i > j) std::swap(i, j);
    auto it = quadratic_.find({i, j});
    return it == quadratic_.end() ? 0.0 : it->second;
  }

  bool zz_only() const { return linear_.empty(); }

  bool operator==(const IsingHamiltonian& other) const = default;

 private:
  void check_index(int i) const {
    if (i < 0 || i >= n_)
      throw ConfigError("term index " + std::to_string(i) + " out of range [0," +
                        std::to_string(n_) + ")");
  }

  int n_;
  std::map<int, double> linear_;
  std::map<PairKey, double> quadratic_;
};

// ---------------------------------------------------------------------------
// EnergyRecord
// ---------------------------------------------------------------------------

struct EnergyRecord {
  Bitstring bitstring;
  double energy = 0.0;
  bool has_ar = false;
  double approximation_ratio = 0.0;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline double energy(const IsingHamiltonian& H, const Bitstring& x) {
  if (int(x.size()) != H.n())
    throw DimensionError("energy: bitstring length " + std::to_string(x.size()) +
                         " != n=" + std::to_string(H.n()));
  double e = 0.0;
  for (const auto& [i, h] : H.linear()) e += h * x.spin(i);
  for (const auto& [ij, J] : H.quadratic())
    e += J * x.spin(ij.first) * x.spin(ij.second);
  return e;
}

/// H -> H^y: h_i -> (-1)^{y_i} h_i, J_ij -> (-1)^{y_i + y_j} J_ij. Satisfies
/// energy(H^y, x) == energy(H, x XOR y) for all x, and preserves the energy
/// multiset. Involution: transforming twice by the same y restores H.
inline IsingHamiltonian gauge_transform(const IsingHamiltonian& H,
                                        const GaugeMask& y) {
  if (y.size() != std::size_t(H.n()))
    throw DimensionError("gauge_transform: mask length mismatch");
  IsingHamiltonian out(H.n());
  for (const auto& [i, h] : H.linear())
    out.set_linear(i, y.mask[i] ? -h : h);
  for (const auto& [ij, J] : H.quadratic()) {
    const int flips = y.mask[ij.first] + y.mask[ij.second];
    out.set_quadratic(ij.first, ij.second, (flips % 2) ? -J : J);
  }
  return out;
}

/// Sherrington-Kirkpatrick instance: no fields, J_ij i.i.d. uniform on
/// {+1,-1} for every pair i<j. Deterministic given seed.
inline IsingHamiltonian generate_sk(int n, std::uint64_t seed) {
  if (n < 2) throw ConfigError("SK instance requires n >= 2");
  IsingHamiltonian H(n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      H.set_quadratic(i, j, (rng.next_u64() & 1) ? 1.0 : -1.0);
  return H;
}

/// AR = E / E_GS for minimization with E_GS < 0. Equals 1.0 at the optimum
/// and can go negative for adversarial samples.
inline double approximation_ratio(double e, double e_gs) {
  if (e_gs >= 0.0)
    throw ConfigError("approximation ratio requires a negative reference energy");
  return e / e_gs;
}

/// Hamming weight of a raw sample after unwinding the cumulative gauge into
/// the original problem frame.
inline int effective_hamming_weight(const Bitstring& x_raw, const GaugeMask& g) {
  if (x_raw.size() != g.size())
    throw DimensionError("effective_hamming_weight: length mismatch");
  return (x_raw ^ g.mask).popcount();
}

// ---------------------------------------------------------------------------
// Instance file format
//
//   # comment
//   n 16
//   0 -1.5        (linear: i h_i)
//   0 1 1         (quadratic: i j J_ij, i<j)
// ---------------------------------------------------------------------------

inline IsingHamiltonian parse_instance(std::istream& in) {
  std::string line;
  int line_no = 0;
  int n = -1;
  IsingHamiltonian H;
  std::map<std::pair<int, int>, int> seen_quadratic;
  std::map<int, int> seen_linear;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;  // blank line
    if (n < 0) {
      if (first != "n") throw ParseError("expected header 'n <int>'", line_no);
      if (!(ls >> n) || n <= 0) throw ParseError("invalid qubit count", line_no);
      H = IsingHamiltonian(n);
      continue;
    }
    double a, b, c;
    std::istringstream ts(line);
    if (ts >> a >> b >> c) {
      const int i = int(a), j = int(b);
      if (double(i) != a || double(j) != b)
        throw ParseError("term indices must be integers", line_no);
      if (i < 0 || j < 0 || i >= n || j >= n)
        throw ParseError("index out of range", line_no);
      if (i >= j) throw ParseError("quadratic term requires i < j", line_no);
      if (seen_quadratic.count({i, j}))
        throw ParseError("duplicate quadratic term (" + std::to_string(i) + "," +
                             std::to_string(j) + "), first at line " +
                             std::to_string(seen_quadratic[{i, j}]),
                         line_no);
      seen_quadratic[{i, j}] = line_no;
      H.set_quadratic(i, j, c);
    } else {
      ts.clear();
      ts.str(line);
      if (!(ts >> a >> b)) throw ParseError("malformed term line", line_no);
      std::string extra;
      if (ts >> extra) throw ParseError("trailing tokens on term line", line_no);
      const int i = int(a);
      if (double(i) != a) throw ParseError("term index must be an integer", line_no);
      if (i < 0 || i >= n) throw ParseError("index out of range", line_no);
      if (seen_linear.count(i))
        throw ParseError("duplicate linear term " + std::to_string(i) +
                             ", first at line " + std::to_string(seen_linear[i]),
                         line_no);
      seen_linear[i] = line_no;
      H.set_linear(i, b);
    }
  }
  if (n < 0) throw ParseError("missing header 'n <int>'", line_no + 1);
  return H;
}

inline IsingHamiltonian parse_instance(const std::string& text) {
  std::istringstream in(text);
  return parse_instance(in);
}

inline void serialize_instance(const IsingHamiltonian& H, std::ostream& out) {
  out << "n " << H.n() << "\n";
  for (const auto& [i, h] : H.linear())
    out << i << " " << format_double(h) << "\n";
  for (const auto& [ij, J] : H.quadratic())
    out << ij.first << " " << ij.second << " " << format_double(J) << "\n";
}

inline std::string serialize_instance(const IsingHamiltonian& H) {
  std::ostringstream out;
  serialize_instance(H, out);
  return out.str();
}

/// Content hash used to reference instances from run outputs.
inline std::string instance_hash(const IsingHamiltonian& H) {
  return hex64(fnv1a(serialize_instance(H)));
}

}  // namespace ndar
