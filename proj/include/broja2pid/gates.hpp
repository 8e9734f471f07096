#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "broja2pid/distributions.hpp"
#include "broja2pid/errors.hpp"

namespace broja2pid {

/// Reference decomposition of a gate, in bits.
struct GateReference {
  double si;
  double uiy;
  double uiz;
  double ci;
};

namespace detail {

// Enumerates all 2^k assignments of k fair bits and collects (x, y, z)
// outcomes, summing equal ones.
inline RawDistribution from_bits(
    int k, const std::function<Outcome(const std::vector<int>&)>& f) {
  RawDistribution out;
  const double w = 1.0 / static_cast<double>(1 << k);
  std::vector<int> bits(k);
  for (int mask = 0; mask < (1 << k); ++mask) {
    for (int i = 0; i < k; ++i) bits[i] = (mask >> i) & 1;
    out[f(bits)] += w;
  }
  return out;
}

// Packs a tuple of bits into one integer label, first bit most significant.
inline std::int64_t pack_bits(std::initializer_list<int> bits) {
  std::int64_t v = 0;
  for (int b : bits) v = 2 * v + b;
  return v;
}

}  // namespace detail

inline const std::vector<std::string>& gate_names() {
  static const std::vector<std::string> names = {
      "RDN", "UNQ", "XOR", "AND", "RDNXOR", "RDNUNQXOR", "XORAND"};
  return names;
}

/// Toy gates over independent fair bits W1..W5. Compound variables are packed
/// into integers.
inline RawDistribution gate(std::string_view name) {
  using detail::from_bits;
  using detail::pack_bits;
  auto o = [](std::int64_t x, std::int64_t y, std::int64_t z) {
    return Outcome{Symbol(x), Symbol(y), Symbol(z)};
  };
  if (name == "RDN") {
    return from_bits(1, [&](const auto& w) { return o(w[0], w[0], w[0]); });
  }
  if (name == "UNQ") {
    return from_bits(2, [&](const auto& w) {
      return o(pack_bits({w[0], w[1]}), w[0], w[1]);
    });
  }
  if (name == "XOR") {
    return from_bits(2, [&](const auto& w) { return o(w[0] ^ w[1], w[0], w[1]); });
  }
  if (name == "AND") {
    return from_bits(2, [&](const auto& w) { return o(w[0] & w[1], w[0], w[1]); });
  }
  if (name == "RDNXOR") {
    return from_bits(3, [&](const auto& w) {
      return o(pack_bits({w[0] ^ w[1], w[2]}), pack_bits({w[0], w[2]}),
               pack_bits({w[1], w[2]}));
    });
  }
  if (name == "RDNUNQXOR") {
    return from_bits(5, [&](const auto& w) {
      return o(pack_bits({w[0] ^ w[1], w[2], w[3], w[4]}),
               pack_bits({w[0], w[2], w[3]}), pack_bits({w[1], w[2], w[4]}));
    });
  }
  if (name == "XORAND") {
    return from_bits(2, [&](const auto& w) {
      return o(pack_bits({w[0] ^ w[1], w[0] & w[1]}), w[0], w[1]);
    });
  }
  throw UnknownGate("unknown gate '" + std::string(name) + "'");
}

inline GateReference gate_reference(std::string_view name) {
  // AND: SI = I(X;Y) = h(1/4) - 1/2
  static const double and_si = 1.5 - 0.75 * std::log2(3.0);
  static const std::map<std::string, GateReference, std::less<>> table = {
      {"RDN", {1.0, 0.0, 0.0, 0.0}},
      {"UNQ", {0.0, 1.0, 1.0, 0.0}},
      {"XOR", {0.0, 0.0, 0.0, 1.0}},
      {"AND", {and_si, 0.0, 0.0, 0.5}},
      {"RDNXOR", {1.0, 0.0, 0.0, 1.0}},
      {"RDNUNQXOR", {1.0, 1.0, 1.0, 1.0}},
      {"XORAND", {0.5, 0.0, 0.0, 1.0}},
  };
  auto it = table.find(name);
  if (it == table.end()) {
    throw UnknownGate("unknown gate '" + std::string(name) + "'");
  }
  return it->second;
}

/// COPY(m, n): Y uniform on m symbols, Z uniform on n, independent, X = (Y,Z)
/// encoded as y * n + z.
inline RawDistribution copy_gate(int m, int n) {
  if (m < 1 || n < 1) throw InvalidSize("COPY sizes must be >= 1");
  RawDistribution out;
  const double w = 1.0 / (static_cast<double>(m) * n);
  for (int y = 0; y < m; ++y) {
    for (int z = 0; z < n; ++z) {
      out[{Symbol(static_cast<std::int64_t>(y) * n + z), Symbol(y), Symbol(z)}] = w;
    }
  }
  return out;
}

/// Uniform draw from the simplex over nx*ny*nz outcomes (normalized
/// exponentials). Deterministic in the seed.
inline RawDistribution random_simplex_distribution(int nx, int ny, int nz,
                                                   std::uint64_t seed) {
  if (nx < 1 || ny < 1 || nz < 1) throw InvalidSize("alphabet sizes must be >= 1");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(static_cast<std::size_t>(nx) * ny * nz);
  double total = 0.0;
  for (auto& v : w) {
    v = expo(rng);
    total += v;
  }
  RawDistribution out;
  std::size_t k = 0;
  for (int x = 0; x < nx; ++x) {
    for (int y = 0; y < ny; ++y) {
      for (int z = 0; z < nz; ++z) {
        const double v = w[k++] / total;
        if (v > 0.0) out[{Symbol(x), Symbol(y), Symbol(z)}] = v;
      }
    }
  }
  return out;
}

}  // namespace broja2pid
