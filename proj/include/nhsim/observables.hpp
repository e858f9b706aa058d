// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nhsim/evolution.hpp"
#include "nhsim/models.hpp"
#include "nhsim/statevector.hpp"

namespace nhsim {

/// n_i = (<Z_i> + 1)/2 on the normalized state; only the first num_sites
/// qubits are reported (ancillas excluded).
inline Eigen::VectorXd density(const StateVector& s, int num_sites = -1) {
  if (num_sites < 0) num_sites = s.num_qubits;
  if (num_sites > s.num_qubits)
    throw std::invalid_argument("density: more sites than qubits");
  if (norm2(s) <= 0.0) throw std::domain_error("density: zero-norm state");
  return detail::site_densities(s, num_sites);
}

/// Normalized center of mass x_c = sum_i i n_i / sum_i n_i.
inline double center_of_mass(const Eigen::VectorXd& profile) {
  if (profile.size() == 0) throw std::invalid_argument("center_of_mass: empty profile");
  const double total = profile.sum();
  if (total <= 0.0) throw std::invalid_argument("center_of_mass: all-zero profile");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < profile.size(); ++i) acc += static_cast<double>(i) * profile[i];
  return acc / total;
}

/// Raw (unnormalized) form x_c = sum_i i n_i.
inline double center_of_mass_raw(const Eigen::VectorXd& profile) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < profile.size(); ++i) acc += static_cast<double>(i) * profile[i];
  return acc;
}

/// n_bar_i = (1/N_steps) sum_{k=1..N_steps} n_i(k dt); the t = 0 record is
/// excluded when present.
inline Eigen::VectorXd time_averaged_density(const EvolutionTrace& trace) {
  if (trace.densities.empty()) throw std::invalid_argument("time_averaged_density: empty trace");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(trace.num_sites);
  int used = 0;
  for (std::size_t k = 0; k < trace.densities.size(); ++k) {
    if (trace.times[k] == 0.0 && trace.densities.size() > 1) continue;
    if (!trace.empty_point.empty() && trace.empty_point[k]) continue;
    acc += trace.densities[k];
    ++used;
  }
  if (used == 0) throw std::invalid_argument("time_averaged_density: no usable records");
  return acc / used;
}

struct OverlapWeightedDensity {
  Eigen::VectorXd profile;
  bool degeneracy_warning = false;   // near-degenerate eigenvalues detected
  std::vector<int> sites_over_one;   // entries > 1 are reported, not clamped
};

/// Initial-state-overlap-weighted eigenstate density
/// n'(i) = C sum_j |<psi0|psi_j>| (<psi_j|Z_i|psi_j> + 1)/2 over unit-norm
/// right eigenvectors, with C fixed by sum_i n'(i) = L/2.
inline OverlapWeightedDensity overlap_weighted_density(const ModelSpec& spec,
                                                       const StateVector& psi0) {
  spec.validate();
  if (psi0.num_qubits != spec.length)
    throw std::invalid_argument("overlap_weighted_density: state size mismatch");
  const MatX H = hamiltonian_dense(spec);
  Eigen::ComplexEigenSolver<MatX> es(H);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("overlap_weighted_density: eigensolver failed");

  OverlapWeightedDensity out;
  const int L = spec.length;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(L);
  const Eigen::Index dim = H.rows();

  // flag near-coincident eigenvalues; the sum proceeds over the returned
  // eigenvectors as-is
  std::vector<cxd> evs(static_cast<std::size_t>(dim));
  for (Eigen::Index j = 0; j < dim; ++j) evs[static_cast<std::size_t>(j)] = es.eigenvalues()[j];
  const double scale = std::max(1.0, std::abs(es.eigenvalues().cwiseAbs().maxCoeff()));
  for (std::size_t a = 0; a < evs.size() && !out.degeneracy_warning; ++a)
    for (std::size_t b = a + 1; b < evs.size(); ++b)
      if (std::abs(evs[a] - evs[b]) < 1e-9 * scale) {
        out.degeneracy_warning = true;
        break;
      }

  for (Eigen::Index j = 0; j < dim; ++j) {
    VecX v = es.eigenvectors().col(j);
    v /= v.norm();
    const double weight = std::abs(psi0.amps.dot(v) / std::sqrt(norm2(psi0)));
    if (weight == 0.0) continue;
    StateVector sv(spec.length, v);
    acc += weight * detail::site_densities(sv, L);
  }
  const double target = L / 2.0;
  out.profile = acc * (target / acc.sum());
  for (int i = 0; i < L; ++i) {
    if (out.profile[i] < 0.0)
      throw std::runtime_error("overlap_weighted_density: negative entry");
    if (out.profile[i] > 1.0) out.sites_over_one.push_back(i);
  }
  return out;
}

}  // namespace nhsim
