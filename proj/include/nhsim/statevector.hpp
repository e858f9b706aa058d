// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nhsim/bitstring.hpp"

namespace nhsim {

using cxd = std::complex<double>;
using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;

enum class Spin : int { Down = 0, Up = 1 };

/// Dense amplitude vector over num_qubits qubits. Bit i of a basis index
/// addresses qubit i (qubit 0 least significant). States may be
/// unnormalized: post-selected evolution keeps the lost norm as success
/// bookkeeping.
struct StateVector {
  int num_qubits = 0;
  VecX amps;

  StateVector() = default;
  explicit StateVector(int n) : num_qubits(n), amps(VecX::Zero(dim_of(n))) {}
  StateVector(int n, VecX a) : num_qubits(n), amps(std::move(a)) {
    if (amps.size() != dim_of(n))
      throw std::invalid_argument("StateVector: amplitude length != 2^n");
  }

  Eigen::Index dim() const { return amps.size(); }

  static Eigen::Index dim_of(int n) {
    if (n < 0 || n > 30) throw std::invalid_argument("StateVector: bad qubit count");
    return Eigen::Index{1} << n;
  }
};

inline StateVector init_basis(const Bitstring& bits) {
  StateVector s(bits.num_bits);
  s.amps[static_cast<Eigen::Index>(bits.bits)] = cxd{1.0, 0.0};
  return s;
}

inline double norm2(const StateVector& s) { return s.amps.squaredNorm(); }

inline cxd inner(const StateVector& a, const StateVector& b) {
  if (a.num_qubits != b.num_qubits)
    throw std::invalid_argument("inner: dimension mismatch");
  return a.amps.dot(b.amps);  // Eigen dot conjugates the left argument
}

/// Applies a dense 2^k x 2^k operator to the k target qubits (op bit t
/// addresses targets[t]). Works by index gather/scatter, so non-unitary
/// operators and k up to num_qubits are both fine.
inline void apply_inplace(StateVector& s, const MatX& op,
                          std::span<const int> targets) {
  const int n = s.num_qubits;
  const int k = static_cast<int>(targets.size());
  const Eigen::Index d = Eigen::Index{1} << k;
  if (op.rows() != d || op.cols() != d)
    throw std::invalid_argument("apply: operator dimension != 2^k");
  std::uint64_t tmask = 0;
  for (int t : targets) {
    if (t < 0 || t >= n) throw std::invalid_argument("apply: target out of range");
    const std::uint64_t bit = std::uint64_t{1} << t;
    if (tmask & bit) throw std::invalid_argument("apply: duplicate target");
    tmask |= bit;
  }

  // offsets[sub] = the full-register bits addressed by op-index sub
  std::vector<std::uint64_t> offsets(static_cast<std::size_t>(d));
  for (Eigen::Index sub = 0; sub < d; ++sub) {
    std::uint64_t off = 0;
    for (int t = 0; t < k; ++t)
      if ((sub >> t) & 1) off |= (std::uint64_t{1} << targets[static_cast<std::size_t>(t)]);
    offsets[static_cast<std::size_t>(sub)] = off;
  }

  VecX in(d), out(d);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t base = 0; base < total; ++base) {
    if (base & tmask) continue;
    for (Eigen::Index sub = 0; sub < d; ++sub)
      in[sub] = s.amps[static_cast<Eigen::Index>(base | offsets[static_cast<std::size_t>(sub)])];
    out.noalias() = op * in;
    for (Eigen::Index sub = 0; sub < d; ++sub)
      s.amps[static_cast<Eigen::Index>(base | offsets[static_cast<std::size_t>(sub)])] = out[sub];
  }
}

inline StateVector apply(const StateVector& s, const MatX& op,
                         std::span<const int> targets) {
  StateVector out = s;
  apply_inplace(out, op, targets);
  return out;
}

inline StateVector apply(const StateVector& s, const MatX& op,
                         std::initializer_list<int> targets) {
  return apply(s, op, std::span<const int>(targets.begin(), targets.size()));
}

struct Projection {
  StateVector state;      // kept branch, NOT renormalized
  double success_prob = 0.0;
};

/// Zeroes the branch with the opposite outcome. success_prob is the kept
/// norm^2 over the input norm^2; zero signals an impossible post-selection.
inline Projection project(const StateVector& s, int qubit, Spin outcome) {
  if (qubit < 0 || qubit >= s.num_qubits)
    throw std::invalid_argument("project: qubit out of range");
  const double in2 = norm2(s);
  Projection r;
  r.state = s;
  const std::uint64_t bit = std::uint64_t{1} << qubit;
  const bool keep_set = (outcome == Spin::Up);
  for (Eigen::Index i = 0; i < r.state.dim(); ++i) {
    const bool set = (static_cast<std::uint64_t>(i) & bit) != 0;
    if (set != keep_set) r.state.amps[i] = cxd{0.0, 0.0};
  }
  r.success_prob = in2 > 0.0 ? norm2(r.state) / in2 : 0.0;
  return r;
}

inline double expect_z(const StateVector& s, int qubit) {
  if (qubit < 0 || qubit >= s.num_qubits)
    throw std::invalid_argument("expect_z: qubit out of range");
  const double n2 = norm2(s);
  if (n2 <= 0.0) throw std::domain_error("expect_z: zero-norm state");
  const std::uint64_t bit = std::uint64_t{1} << qubit;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    const double p = std::norm(s.amps[i]);
    acc += (static_cast<std::uint64_t>(i) & bit) ? p : -p;
  }
  return acc / n2;
}

namespace detail {
// 53-bit uniform in [0,1); keeps sampling identical across standard-library
// implementations (distributions are not pinned by the standard).
inline double uniform53(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t draw_index(const std::vector<double>& cdf,
                                std::mt19937_64& rng) {
  const double u = uniform53(rng) * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<std::uint64_t>(it - cdf.begin());
}
}  // namespace detail

/// Multinomial draw from |amps|^2 / norm^2. Deterministic for a fixed seed.
inline ShotTable sample(const StateVector& s, std::uint64_t shots,
                        std::uint64_t seed) {
  ShotTable table;
  table.num_qubits = s.num_qubits;
  table.total_shots = shots;
  if (shots == 0) return table;
  const double n2 = norm2(s);
  if (n2 <= 0.0) throw std::domain_error("sample: zero-norm state");

  std::vector<double> cdf(static_cast<std::size_t>(s.dim()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    acc += std::norm(s.amps[i]);
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  std::mt19937_64 rng(seed);
  for (std::uint64_t t = 0; t < shots; ++t)
    ++table.counts[detail::draw_index(cdf, rng)];
  table.postselected_shots = shots;
  return table;
}

}  // namespace nhsim
