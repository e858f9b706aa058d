// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "nhsim/models.hpp"
#include "nhsim/noise.hpp"
#include "nhsim/statevector.hpp"

namespace nhsim {

enum class EvolutionMode { EXACT, SAMPLED };

/// Per-step record of a Trotter run: site densities of the post-selected,
/// renormalized state (ancillas excluded) and the cumulative post-selection
/// probability. SAMPLED traces also carry the shot bookkeeping.
struct EvolutionTrace {
  EvolutionMode mode = EvolutionMode::EXACT;
  int num_sites = 0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> densities;
  std::vector<double> success_prob;         // cumulative; sampled fraction in SAMPLED mode
  std::vector<std::uint64_t> kept_shots;    // SAMPLED only
  std::vector<bool> empty_point;            // SAMPLED: all shots discarded at this time
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  StateVector final_state;                  // EXACT: unnormalized post-selected state
};

namespace detail {

inline Eigen::VectorXd site_densities(const StateVector& s, int num_sites) {
  const double n2 = norm2(s);
  if (n2 <= 0.0) throw std::runtime_error("site_densities: zero-norm state");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_sites);
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    const double p = std::norm(s.amps[i]);
    if (p == 0.0) continue;
    for (int q = 0; q < num_sites; ++q)
      if ((static_cast<std::uint64_t>(i) >> q) & 1u) out[q] += p;
  }
  return out / n2;
}

inline StateVector attach_ancillas_up(const StateVector& psi0, int num_ancillas) {
  StateVector full(psi0.num_qubits + num_ancillas);
  std::uint64_t anc = 0;
  for (int a = 0; a < num_ancillas; ++a)
    anc |= (std::uint64_t{1} << (psi0.num_qubits + a));
  for (Eigen::Index i = 0; i < psi0.dim(); ++i)
    full.amps[static_cast<Eigen::Index>(static_cast<std::uint64_t>(i) | anc)] = psi0.amps[i];
  return full;
}

inline void apply_layer(StateVector& state, const TrotterLayer& layer,
                        int num_physical) {
  if (!layer.nonunitary) {
    apply_inplace(state, layer.op, layer.targets);
    return;
  }
  std::vector<int> targets = layer.targets;
  targets.push_back(num_physical + layer.ancilla);
  apply_inplace(state, layer.op, targets);
}

}  // namespace detail

/// Trotter-free oracle: expm(-i H T) psi0, unnormalized.
inline StateVector evolve_ed(const ModelSpec& spec, const StateVector& psi0,
                             double T) {
  spec.validate();
  if (T < 0.0) throw std::invalid_argument("evolve_ed: T must be >= 0");
  if (spec.length > kDenseCap) throw std::invalid_argument("evolve_ed: dense cap exceeded");
  if (psi0.num_qubits != spec.length)
    throw std::invalid_argument("evolve_ed: state size mismatch");
  const MatX H = hamiltonian_dense(spec);
  const MatX E = expm(cxd{0.0, -T} * H);
  return StateVector(psi0.num_qubits, E * psi0.amps);
}

/// ED trace on the same step grid as a Trotter run (for CSV export and
/// side-by-side comparison).
inline EvolutionTrace evolve_ed_trace(const ModelSpec& spec, const StateVector& psi0,
                                      double dt, int steps) {
  spec.validate();
  const MatX H = hamiltonian_dense(spec);
  const MatX E = expm(cxd{0.0, -dt} * H);
  EvolutionTrace trace;
  trace.mode = EvolutionMode::EXACT;
  trace.num_sites = spec.length;
  trace.dt = dt;
  StateVector state = psi0;
  const double n0 = norm2(psi0);
  trace.times.push_back(0.0);
  trace.densities.push_back(detail::site_densities(state, spec.length));
  trace.success_prob.push_back(1.0);
  for (int k = 1; k <= steps; ++k) {
    state.amps = E * state.amps;
    trace.times.push_back(k * dt);
    trace.densities.push_back(detail::site_densities(state, spec.length));
    trace.success_prob.push_back(norm2(state) / n0);
  }
  trace.final_state = std::move(state);
  return trace;
}

/// Executes a Trotter plan with per-step ancilla projection onto spin-up
/// (the canonical semantics): each dilated block is followed immediately by
/// projecting its ancilla, which leaves the ancilla back in the up state
/// for reuse. With deferred=true all projections of the run are delayed to
/// the very end, which is only accepted when each ancilla is bound once
/// (single-step runs for the built-in plans).
inline EvolutionTrace evolve_exact(const TrotterPlan& plan, const StateVector& psi0,
                                   int steps, bool deferred = false) {
  if (psi0.num_qubits != plan.num_physical)
    throw std::invalid_argument("evolve_exact: state size mismatch");
  if (steps < 0) throw std::invalid_argument("evolve_exact: steps must be >= 0");
  if (deferred) {
    std::vector<int> bind_count(static_cast<std::size_t>(plan.num_ancillas), 0);
    for (const auto& layer : plan.layers)
      if (layer.nonunitary) ++bind_count[static_cast<std::size_t>(layer.ancilla)];
    for (int c : bind_count)
      if (c * steps > 1)
        throw std::invalid_argument(
            "evolve_exact: deferred measurement requires each ancilla bound once");
  }

  EvolutionTrace trace;
  trace.mode = EvolutionMode::EXACT;
  trace.num_sites = plan.num_physical;
  trace.dt = plan.dt;

  StateVector state = detail::attach_ancillas_up(psi0, plan.num_ancillas);
  const double n0 = norm2(state);
  trace.times.push_back(0.0);
  trace.densities.push_back(detail::site_densities(state, plan.num_physical));
  trace.success_prob.push_back(1.0);

  for (int k = 1; k <= steps; ++k) {
    for (const auto& layer : plan.layers) {
      detail::apply_layer(state, layer, plan.num_physical);
      if (layer.nonunitary && !deferred) {
        Projection proj = project(state, plan.num_physical + layer.ancilla, Spin::Up);
        if (proj.success_prob <= 0.0)
          throw std::runtime_error(
              "evolve_exact: post-selection impossible (success probability 0) at step " +
              std::to_string(k));
        state = std::move(proj.state);
      }
    }
    if (deferred && k == steps)
      for (int a = 0; a < plan.num_ancillas; ++a) {
        Projection proj = project(state, plan.num_physical + a, Spin::Up);
        if (proj.success_prob <= 0.0)
          throw std::runtime_error("evolve_exact: deferred post-selection impossible");
        state = std::move(proj.state);
      }
    trace.times.push_back(k * plan.dt);
    trace.densities.push_back(detail::site_densities(state, plan.num_physical));
    trace.success_prob.push_back(norm2(state) / n0);
  }
  trace.final_state = std::move(state);
  return trace;
}

/// Sampled execution. Per recorded step the full-register bitstring
/// distribution is taken from the exact post-selected state of that step
/// (ancillas read up), the surviving-shot count is a binomial draw at the
/// cumulative success probability, and readout noise (when given) corrupts
/// recorded strings before the ancilla-down filter. mitigate_readout
/// applies the subspace correction before filtering.
inline EvolutionTrace evolve_sampled(const TrotterPlan& plan, const StateVector& psi0,
                                     int steps, std::uint64_t shots, std::uint64_t seed,
                                     const std::optional<ReadoutModel>& readout = {},
                                     bool mitigate_readout = false) {
  if (shots < 1) throw std::invalid_argument("evolve_sampled: shots must be >= 1");
  if (psi0.num_qubits != plan.num_physical)
    throw std::invalid_argument("evolve_sampled: state size mismatch");
  if (readout) {
    readout->validate();
    if (readout->num_qubits() != plan.num_physical + plan.num_ancillas)
      throw std::invalid_argument("evolve_sampled: readout model must cover the full register");
  }

  EvolutionTrace trace;
  trace.mode = EvolutionMode::SAMPLED;
  trace.num_sites = plan.num_physical;
  trace.dt = plan.dt;
  trace.shots = shots;
  trace.seed = seed;

  std::mt19937_64 rng(seed);
  StateVector state = detail::attach_ancillas_up(psi0, plan.num_ancillas);
  const double n0 = norm2(state);
  const int total_qubits = plan.num_physical + plan.num_ancillas;
  std::uint64_t anc_mask = 0;
  for (int a = 0; a < plan.num_ancillas; ++a)
    anc_mask |= (std::uint64_t{1} << (plan.num_physical + a));

  auto record = [&](int step_index, double cumulative) {
    // surviving shots ~ Binomial(shots, cumulative)
    std::uint64_t kept = 0;
    for (std::uint64_t t = 0; t < shots; ++t)
      if (detail::uniform53(rng) < cumulative) ++kept;

    ShotTable table;
    table.num_qubits = total_qubits;
    table.total_shots = shots;
    if (kept > 0) {
      std::vector<double> cdf(static_cast<std::size_t>(state.dim()));
      double acc = 0.0;
      for (Eigen::Index i = 0; i < state.dim(); ++i) {
        acc += std::norm(state.amps[i]);
        cdf[static_cast<std::size_t>(i)] = acc;
      }
      for (std::uint64_t t = 0; t < kept; ++t)
        ++table.counts[detail::draw_index(cdf, rng)];
      table.postselected_shots = kept;
    }
    if (readout && !readout->is_zero())
      table = corrupt(table, *readout, rng());

    trace.times.push_back(step_index * plan.dt);
    if (mitigate_readout && readout && !table.counts.empty()) {
      QuasiProbTable quasi = mitigate(table, *readout);
      double mass = 0.0;
      Eigen::VectorXd dens = Eigen::VectorXd::Zero(plan.num_physical);
      for (const auto& [key, w] : quasi.weights) {
        if ((key & anc_mask) != anc_mask) continue;  // an ancilla read down
        mass += w;
        for (int q = 0; q < plan.num_physical; ++q)
          if ((key >> q) & 1u) dens[q] += w;
      }
      trace.empty_point.push_back(mass <= 0.0);
      trace.densities.push_back(mass > 0.0 ? Eigen::VectorXd(dens / mass)
                                           : Eigen::VectorXd::Zero(plan.num_physical));
      trace.kept_shots.push_back(table.postselected_shots);
      trace.success_prob.push_back(static_cast<double>(table.postselected_shots) /
                                   static_cast<double>(shots));
      return;
    }

    std::uint64_t surviving = 0;
    Eigen::VectorXd dens = Eigen::VectorXd::Zero(plan.num_physical);
    for (const auto& [key, c] : table.counts) {
      if ((key & anc_mask) != anc_mask) continue;  // an ancilla read down
      surviving += c;
      for (int q = 0; q < plan.num_physical; ++q)
        if ((key >> q) & 1u) dens[q] += static_cast<double>(c);
    }
    trace.empty_point.push_back(surviving == 0);
    trace.densities.push_back(surviving > 0
                                  ? Eigen::VectorXd(dens / static_cast<double>(surviving))
                                  : Eigen::VectorXd::Zero(plan.num_physical));
    trace.kept_shots.push_back(surviving);
    trace.success_prob.push_back(static_cast<double>(surviving) /
                                 static_cast<double>(shots));
  };

  record(0, 1.0);
  for (int k = 1; k <= steps; ++k) {
    for (const auto& layer : plan.layers)
      detail::apply_layer(state, layer, plan.num_physical);
    for (int a = 0; a < plan.num_ancillas; ++a) {
      Projection proj = project(state, plan.num_physical + a, Spin::Up);
      if (proj.success_prob <= 0.0)
        throw std::runtime_error("evolve_sampled: post-selection impossible at step " +
                                 std::to_string(k));
      state = std::move(proj.state);
    }
    record(k, norm2(state) / n0);
  }
  return trace;
}

/// Surviving fraction at the final recorded step of a SAMPLED trace.
inline double postselection_fraction(const EvolutionTrace& trace) {
  if (trace.mode != EvolutionMode::SAMPLED)
    throw std::invalid_argument("postselection_fraction: SAMPLED trace required");
  if (trace.kept_shots.empty()) throw std::invalid_argument("postselection_fraction: empty trace");
  return static_cast<double>(trace.kept_shots.back()) / static_cast<double>(trace.shots);
}

}  // namespace nhsim
