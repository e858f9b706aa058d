// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "nhsim/bitstring.hpp"
#include "nhsim/statevector.hpp"

namespace nhsim {

/// Per-qubit independent readout flips: p01 = P(read 1 | true 0),
/// p10 = P(read 0 | true 1).
struct ReadoutModel {
  std::vector<double> p01;
  std::vector<double> p10;

  ReadoutModel() = default;
  ReadoutModel(int num_qubits, double sym01, double sym10)
      : p01(static_cast<std::size_t>(num_qubits), sym01),
        p10(static_cast<std::size_t>(num_qubits), sym10) {
    validate();
  }

  int num_qubits() const { return static_cast<int>(p01.size()); }

  void validate() const {
    if (p01.size() != p10.size())
      throw std::invalid_argument("ReadoutModel: p01/p10 size mismatch");
    for (std::size_t i = 0; i < p01.size(); ++i)
      if (!(p01[i] >= 0.0 && p01[i] < 0.5 && p10[i] >= 0.0 && p10[i] < 0.5))
        throw std::invalid_argument("ReadoutModel: probabilities must lie in [0, 0.5)");
  }

  bool is_zero() const {
    for (std::size_t i = 0; i < p01.size(); ++i)
      if (p01[i] != 0.0 || p10[i] != 0.0) return false;
    return true;
  }
};

/// Flips each recorded shot's bits independently per the model.
/// Deterministic for a fixed seed (counts iterated in key order).
inline ShotTable corrupt(const ShotTable& table, const ReadoutModel& model,
                         std::uint64_t seed) {
  model.validate();
  if (model.num_qubits() != table.num_qubits)
    throw std::invalid_argument("corrupt: qubit count mismatch");
  ShotTable out;
  out.num_qubits = table.num_qubits;
  out.total_shots = table.total_shots;
  out.postselected_shots = table.postselected_shots;
  std::mt19937_64 rng(seed);
  for (const auto& [key, cnt] : table.counts) {
    for (std::uint64_t t = 0; t < cnt; ++t) {
      std::uint64_t v = key;
      for (int q = 0; q < table.num_qubits; ++q) {
        const bool bit = (v >> q) & 1u;
        const double p = bit ? model.p10[static_cast<std::size_t>(q)]
                             : model.p01[static_cast<std::size_t>(q)];
        if (detail::uniform53(rng) < p) v ^= (std::uint64_t{1} << q);
      }
      ++out.counts[v];
    }
  }
  return out;
}

/// Possibly-negative corrected outcome weights; sums to one.
struct QuasiProbTable {
  int num_qubits = 0;
  std::map<std::uint64_t, double> weights;
  double condition_number = 1.0;
  bool diagonal_fallback = false;

  static QuasiProbTable from_counts(const ShotTable& t) {
    QuasiProbTable q;
    q.num_qubits = t.num_qubits;
    const double tot = static_cast<double>(t.count_sum());
    if (tot > 0)
      for (const auto& [k, c] : t.counts)
        q.weights[k] = static_cast<double>(c) / tot;
    return q;
  }
};

/// Readout-error mitigation restricted to the observed-bitstring subspace:
/// the tensor-product confusion matrix is cut down to the observed strings
/// and solved by least squares for quasi-probabilities, which are then
/// scaled to unit sum. A numerically singular subspace system falls back to
/// the diagonal-only correction and reports the condition estimate.
inline QuasiProbTable mitigate(const ShotTable& table, const ReadoutModel& model) {
  model.validate();
  if (model.num_qubits() != table.num_qubits)
    throw std::invalid_argument("mitigate: qubit count mismatch");
  if (table.counts.empty()) throw std::invalid_argument("mitigate: empty counts");

  std::vector<std::uint64_t> keys;
  keys.reserve(table.counts.size());
  for (const auto& [k, c] : table.counts) keys.push_back(k);
  const Eigen::Index S = static_cast<Eigen::Index>(keys.size());
  if (S > 4096)
    throw std::invalid_argument("mitigate: observed subspace too large (> 4096)");

  const double total = static_cast<double>(table.count_sum());
  Eigen::VectorXd f(S);
  for (Eigen::Index i = 0; i < S; ++i)
    f[i] = static_cast<double>(table.counts.at(keys[static_cast<std::size_t>(i)])) / total;

  // A(i, j) = P(read keys[i] | true keys[j])
  Eigen::MatrixXd A(S, S);
  for (Eigen::Index j = 0; j < S; ++j)
    for (Eigen::Index i = 0; i < S; ++i) {
      double p = 1.0;
      for (int q = 0; q < table.num_qubits; ++q) {
        const bool truth = (keys[static_cast<std::size_t>(j)] >> q) & 1u;
        const bool read = (keys[static_cast<std::size_t>(i)] >> q) & 1u;
        const double p01 = model.p01[static_cast<std::size_t>(q)];
        const double p10 = model.p10[static_cast<std::size_t>(q)];
        p *= truth ? (read ? 1.0 - p10 : p10) : (read ? p01 : 1.0 - p01);
      }
      A(i, j) = p;
    }

  QuasiProbTable out;
  out.num_qubits = table.num_qubits;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  const auto& Rdiag = qr.matrixR().diagonal();
  const double rmax = Rdiag.cwiseAbs().maxCoeff();
  const double rmin = Rdiag.cwiseAbs().minCoeff();
  out.condition_number = rmin > 0.0 ? rmax / rmin
                                    : std::numeric_limits<double>::infinity();

  Eigen::VectorXd q;
  if (qr.rank() < S || !(out.condition_number < 1e12)) {
    out.diagonal_fallback = true;
    q = f.cwiseQuotient(A.diagonal());
  } else {
    q = qr.solve(f);
  }
  const double qsum = q.sum();
  if (qsum != 0.0) q /= qsum;
  for (Eigen::Index i = 0; i < S; ++i)
    out.weights[keys[static_cast<std::size_t>(i)]] = q[i];
  return out;
}

}  // namespace nhsim
