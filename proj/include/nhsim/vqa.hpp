// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "nhsim/evolution.hpp"
#include "nhsim/models.hpp"
#include "nhsim/statevector.hpp"

namespace nhsim {

/// Fixed-structure trainable circuit: a leading column of U3 rotations,
/// then per layer another U3 column followed by the entangling ladder. The
/// ladder alternates even pairs (0,1),(2,3),... and odd pairs (1,2),(3,4),...
/// twice per layer, giving 2(Q-1) controlled flips per layer (3L-2 at the
/// nH-SSH register size Q = 3L/2).
struct AnsatzSpec {
  int num_qubits = 0;
  int num_layers = 0;

  int param_count() const { return 3 * num_qubits * (num_layers + 1); }
  int entanglers_per_layer() const { return 2 * (num_qubits - 1); }
};

/// U3(theta, phi, lambda) single-qubit rotation.
inline MatX u3(double theta, double phi, double lambda) {
  MatX m(2, 2);
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  m(0, 0) = c;
  m(0, 1) = -std::exp(cxd{0.0, lambda}) * s;
  m(1, 0) = std::exp(cxd{0.0, phi}) * s;
  m(1, 1) = std::exp(cxd{0.0, phi + lambda}) * c;
  return m;
}

namespace vqadetail {

inline void apply_u3_inplace(StateVector& s, double theta, double phi, double lambda,
                             int qubit) {
  const double c = std::cos(theta / 2.0), sn = std::sin(theta / 2.0);
  const cxd m00 = c, m01 = -std::exp(cxd{0.0, lambda}) * sn;
  const cxd m10 = std::exp(cxd{0.0, phi}) * sn, m11 = std::exp(cxd{0.0, phi + lambda}) * c;
  const std::uint64_t bit = std::uint64_t{1} << qubit;
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(s.dim()); ++i) {
    if (i & bit) continue;
    const cxd a0 = s.amps[static_cast<Eigen::Index>(i)];
    const cxd a1 = s.amps[static_cast<Eigen::Index>(i | bit)];
    s.amps[static_cast<Eigen::Index>(i)] = m00 * a0 + m01 * a1;
    s.amps[static_cast<Eigen::Index>(i | bit)] = m10 * a0 + m11 * a1;
  }
}

// controlled flip: X on target when the control qubit is up (bit 1)
inline void apply_cx_inplace(StateVector& s, int ctrl, int tgt) {
  const std::uint64_t cb = std::uint64_t{1} << ctrl;
  const std::uint64_t tb = std::uint64_t{1} << tgt;
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(s.dim()); ++i)
    if ((i & cb) && !(i & tb))
      std::swap(s.amps[static_cast<Eigen::Index>(i)],
                s.amps[static_cast<Eigen::Index>(i | tb)]);
}

inline void apply_ladder(StateVector& s, int num_qubits) {
  for (int round = 0; round < 2; ++round) {
    for (int a = 0; a + 1 < num_qubits; a += 2) apply_cx_inplace(s, a, a + 1);
    for (int a = 1; a + 1 < num_qubits; a += 2) apply_cx_inplace(s, a, a + 1);
  }
}

}  // namespace vqadetail

inline StateVector ansatz_apply(const AnsatzSpec& spec, const Eigen::VectorXd& params,
                                const StateVector& psi0) {
  if (psi0.num_qubits != spec.num_qubits)
    throw std::invalid_argument("ansatz_apply: state size mismatch");
  if (params.size() != spec.param_count())
    throw std::invalid_argument("ansatz_apply: parameter count mismatch");
  StateVector s = psi0;
  int k = 0;
  for (int q = 0; q < spec.num_qubits; ++q, k += 3)
    vqadetail::apply_u3_inplace(s, params[k], params[k + 1], params[k + 2], q);
  for (int layer = 0; layer < spec.num_layers; ++layer) {
    for (int q = 0; q < spec.num_qubits; ++q, k += 3)
      vqadetail::apply_u3_inplace(s, params[k], params[k + 1], params[k + 2], q);
    vqadetail::apply_ladder(s, spec.num_qubits);
  }
  return s;
}

struct TargetState {
  StateVector state;          // normalized post-selected final state
  double success_amplitude;   // sqrt of the cumulative success probability
};

/// Exact post-selected evolution used as the recompilation target.
inline TargetState target_apply(const TrotterPlan& plan, const StateVector& psi0,
                                int steps) {
  EvolutionTrace trace = evolve_exact(plan, psi0, steps);
  TargetState t;
  const double n2 = norm2(trace.final_state);
  if (n2 <= 0.0) throw std::runtime_error("target_apply: zero success");
  t.success_amplitude = std::sqrt(trace.success_prob.back());
  t.state = std::move(trace.final_state);
  t.state.amps /= std::sqrt(n2);
  return t;
}

/// Q = 1 - |<ansatz(psi0), target>| with the target normalized, so a
/// perfect recompilation reaches Q = 0 regardless of the target's lost
/// norm. Invariant under global phases of either state.
inline double cost(const AnsatzSpec& spec, const Eigen::VectorXd& params,
                   const StateVector& psi0, const StateVector& target_state) {
  if (target_state.num_qubits != spec.num_qubits)
    throw std::invalid_argument("cost: dimension mismatch");
  const StateVector out = ansatz_apply(spec, params, psi0);
  const double tn = std::sqrt(norm2(target_state));
  return 1.0 - std::abs(inner(out, target_state)) / tn;
}

/// Central-difference gradient of the cost at step h.
inline Eigen::VectorXd cost_gradient(const AnsatzSpec& spec, const Eigen::VectorXd& params,
                                     const StateVector& psi0, const StateVector& target_state,
                                     double h = 1e-5) {
  Eigen::VectorXd g(params.size());
  Eigen::VectorXd p = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    p[i] = params[i] + h;
    const double fp = cost(spec, p, psi0, target_state);
    p[i] = params[i] - h;
    const double fm = cost(spec, p, psi0, target_state);
    p[i] = params[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

struct OptimizeResult {
  Eigen::VectorXd params;
  double best_cost = 1.0;
  std::vector<double> history;  // best-so-far after each cost evaluation
  std::uint64_t evaluations = 0;
  int restarts = 0;
};

/// Deterministic-for-seed minimization of the overlap cost. Each sweep
/// minimizes one angle at a time exactly: the overlap amplitude is linear
/// in (cos(t/2), sin(t/2)) for any single U3 angle, so |overlap|^2 is
/// sinusoidal in the angle and two shifted evaluations pin its maximizer.
/// Stalled sweeps trigger a seeded random restart until the evaluation
/// budget runs out.
inline OptimizeResult optimize(const AnsatzSpec& spec, const StateVector& psi0,
                               const StateVector& target_state, std::uint64_t budget,
                               std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("optimize: budget must be >= 1");
  const int P = spec.param_count();
  const double stop_tol = 1e-10;

  OptimizeResult res;
  res.params = Eigen::VectorXd::Zero(P);
  std::mt19937_64 rng(seed);

  StateVector target_unit = target_state;
  target_unit.amps /= std::sqrt(norm2(target_state));

  auto eval = [&](const Eigen::VectorXd& x) {
    const double f = cost(spec, x, psi0, target_unit);
    ++res.evaluations;
    if (f < res.best_cost) {
      res.best_cost = f;
      res.params = x;
    }
    res.history.push_back(res.best_cost);
    return f;
  };

  std::vector<int> order(static_cast<std::size_t>(P));
  std::iota(order.begin(), order.end(), 0);

  while (res.evaluations < budget && res.best_cost > stop_tol) {
    Eigen::VectorXd x(P);
    if (res.restarts == 0) {
      x.setZero();
    } else {
      for (int i = 0; i < P; ++i)
        x[i] = (detail::uniform53(rng) - 0.5);  // uniform in [-0.5, 0.5)
    }
    ++res.restarts;
    double f = eval(x);
    int stall = 0;
    while (res.evaluations + 2 <= budget && stall < 3 && f > stop_tol) {
      const double f_before = f;
      for (std::size_t j = order.size(); j > 1; --j)
        std::swap(order[j - 1], order[static_cast<std::size_t>(rng() % j)]);
      for (int i : order) {
        if (res.evaluations + 2 > budget) break;
        const double th0 = x[i];
        const double e0 = 1.0 - f;
        x[i] = th0 + M_PI / 2.0;
        const double ep = 1.0 - eval(x);
        x[i] = th0 - M_PI / 2.0;
        const double em = 1.0 - eval(x);
        const double a = (ep * ep + em * em) / 2.0;
        const double p = e0 * e0 - a;
        const double q = (ep * ep - em * em) / 2.0;
        const double r = std::hypot(p, q);
        if (r < 1e-18) {
          x[i] = th0;
          continue;
        }
        x[i] = th0 + std::atan2(q, p);
        f = 1.0 - std::sqrt(std::max(a + r, 0.0));
      }
      if (res.evaluations >= budget) break;
      f = eval(x);  // resync against accumulated drift
      stall = (f > f_before - 1e-10) ? stall + 1 : 0;
    }
  }
  // budget exhaustion contract: one history entry per evaluation, all spent
  while (res.evaluations < budget && res.best_cost > stop_tol) eval(res.params);
  return res;
}

}  // namespace nhsim
