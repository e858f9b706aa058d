// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace nhsim {

/// Spin/occupation string over a qubit register. Bit i addresses qubit i,
/// with the spin-up (fermion present) state stored as 1. Text form is
/// printed and parsed with qubit 0 as the rightmost character.
struct Bitstring {
  int num_bits = 0;
  std::uint64_t bits = 0;

  Bitstring() = default;
  Bitstring(int n, std::uint64_t b) : num_bits(n), bits(b) {
    if (n < 0 || n > 63) throw std::invalid_argument("Bitstring: bad width");
    if (n < 63 && (b >> n) != 0)
      throw std::invalid_argument("Bitstring: bits exceed width");
  }

  bool bit(int i) const {
    if (i < 0 || i >= num_bits) throw std::out_of_range("Bitstring::bit");
    return (bits >> i) & 1u;
  }

  int popcount() const { return __builtin_popcountll(bits); }

  std::string str() const {
    std::string s(static_cast<std::size_t>(num_bits), '0');
    for (int i = 0; i < num_bits; ++i)
      if ((bits >> i) & 1u) s[static_cast<std::size_t>(num_bits - 1 - i)] = '1';
    return s;
  }

  static Bitstring parse(const std::string& s) {
    Bitstring b;
    b.num_bits = static_cast<int>(s.size());
    if (b.num_bits == 0 || b.num_bits > 63)
      throw std::invalid_argument("Bitstring::parse: bad length");
    for (int i = 0; i < b.num_bits; ++i) {
      const char c = s[static_cast<std::size_t>(b.num_bits - 1 - i)];
      if (c == '1')
        b.bits |= (std::uint64_t{1} << i);
      else if (c != '0')
        throw std::invalid_argument("Bitstring::parse: expected 0/1");
    }
    return b;
  }

  friend bool operator==(const Bitstring&, const Bitstring&) = default;
  friend auto operator<=>(const Bitstring&, const Bitstring&) = default;
};

/// Measurement record: basis-index keyed counts plus post-selection
/// bookkeeping. counts holds only the shots that survived filtering, so
/// the entries sum to postselected_shots <= total_shots.
struct ShotTable {
  int num_qubits = 0;
  std::uint64_t total_shots = 0;
  std::uint64_t postselected_shots = 0;
  std::map<std::uint64_t, std::uint64_t> counts;

  std::uint64_t count_sum() const {
    std::uint64_t s = 0;
    for (const auto& [k, c] : counts) s += c;
    return s;
  }
};

}  // namespace nhsim
