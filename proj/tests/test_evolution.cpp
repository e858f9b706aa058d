// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nhsim/evolution.hpp"
#include "nhsim/observables.hpp"

using namespace nhsim;

namespace {

StateVector symmetric_pair_state(int L) {
  // (|site 2 up> + |site 3 up>)/sqrt(2)
  StateVector s(L);
  s.amps[1 << 2] = 1.0 / std::sqrt(2.0);
  s.amps[1 << 3] = 1.0 / std::sqrt(2.0);
  return s;
}

double infidelity(const StateVector& a, const StateVector& b) {
  const double o = std::abs(inner(a, b)) / std::sqrt(norm2(a) * norm2(b));
  return 1.0 - o * o;
}

// per-bond dilation plan for the HN chain (test-only layout; the library's
// built-in HN plans are global)
TrotterPlan local_style_hn_plan(const ModelSpec& spec, double dt) {
  TrotterPlan plan;
  plan.scheme = Scheme::LOCAL;
  plan.dt = dt;
  plan.spec = spec;
  plan.num_physical = spec.length;
  const DilatedUnitary d = dilate(bond_hn(spec.J, spec.gamma, dt));
  const MatX reg = register_matrix(d);
  int anc = 0;
  for (int j = 1; j + 1 < spec.length; j += 2) {  // odd bonds first, as in the global product
    TrotterLayer layer;
    layer.targets = {j, j + 1};
    layer.op = reg;
    layer.nonunitary = true;
    layer.ancilla = anc++;
    layer.rescale_u = d.rescale_u;
    plan.layers.push_back(layer);
  }
  for (int j = 0; j + 1 < spec.length; j += 2) {
    TrotterLayer layer;
    layer.targets = {j, j + 1};
    layer.op = reg;
    layer.nonunitary = true;
    layer.ancilla = anc++;
    layer.rescale_u = d.rescale_u;
    plan.layers.push_back(layer);
  }
  plan.num_ancillas = anc;
  return plan;
}

}  // namespace

TEST_CASE("evolve_ed basics") {
  ModelSpec spec{ModelKind::HN, 4, 1.0, 0.5, 0.0};
  StateVector psi0 = init_basis(Bitstring(4, 0b0010));
  SECTION("T = 0 returns the input") {
    StateVector out = evolve_ed(spec, psi0, 0.0);
    CHECK((out.amps - psi0.amps).cwiseAbs().maxCoeff() < 1e-14);
  }
  SECTION("gamma = 0 preserves the norm") {
    ModelSpec herm{ModelKind::HN, 4, 1.0, 0.0, 0.0};
    StateVector out = evolve_ed(herm, psi0, 2.0);
    CHECK(norm2(out) == Catch::Approx(1.0).epsilon(1e-10));
  }
  SECTION("skin pumping concentrates density at site 0") {
    ModelSpec hn6{ModelKind::HN, 6, 1.0, 0.5, 0.0};
    StateVector out = evolve_ed(hn6, symmetric_pair_state(6), 1.0);
    Eigen::VectorXd n = density(out);
    for (int i = 1; i < 6; ++i) CHECK(n[0] > n[i] * 0.999);
    // frozen from this oracle: the profile leans hard onto sites 0..2
    CHECK(n[0] + n[1] + n[2] > 0.85);
  }
}

TEST_CASE("exact trotter evolution against the ED oracle") {
  ModelSpec spec{ModelKind::HN, 6, 1.0, 0.5, 0.0};
  StateVector psi0 = symmetric_pair_state(6);

  SECTION("gamma = 0 gives success 1 and matches unitary ED") {
    ModelSpec herm{ModelKind::HN, 6, 1.0, 0.0, 0.0};
    TrotterPlan plan = trotter_plan(herm, 0.1, Scheme::GLOBAL);
    EvolutionTrace trace = evolve_exact(plan, psi0, 10);
    for (double s : trace.success_prob) CHECK(s == Catch::Approx(1.0).epsilon(1e-9));
    StateVector ed = evolve_ed(herm, psi0, 1.0);
    CHECK(infidelity(trace.final_state, ed) < 1e-3);
  }

  SECTION("per-step state equals the direct dense uR product") {
    TrotterPlan plan = trotter_plan(spec, 0.1, Scheme::GLOBAL);
    const MatX R = global_step_operator(spec, 0.1);
    const double u = plan.layers[0].rescale_u;
    EvolutionTrace trace = evolve_exact(plan, psi0, 3);
    VecX direct = psi0.amps;
    for (int k = 0; k < 3; ++k) direct = u * (R * direct);
    VecX physical(64);
    for (Eigen::Index i = 0; i < 64; ++i)
      physical[i] = trace.final_state.amps[i + 64];  // ancilla bit set
    CHECK((physical - direct).cwiseAbs().maxCoeff() < 1e-10);
  }

  SECTION("densities match the ED trace within Trotter tolerance") {
    TrotterPlan plan = trotter_plan(spec, 0.1, Scheme::GLOBAL);
    EvolutionTrace trotter = evolve_exact(plan, psi0, 10);
    EvolutionTrace ed = evolve_ed_trace(spec, psi0, 0.1, 10);
    for (std::size_t k = 0; k < trotter.densities.size(); ++k)
      CHECK((trotter.densities[k] - ed.densities[k]).cwiseAbs().maxCoeff() < 0.02);
  }

  SECTION("nhssh local: x_c decreases monotonically after step 2") {
    ModelSpec ssh{ModelKind::NHSSH, 6, 2.0, 1.5, 0.0};
    TrotterPlan plan = trotter_plan(ssh, 0.1, Scheme::LOCAL);
    EvolutionTrace trace = evolve_exact(plan, symmetric_pair_state(6), 10);
    std::vector<double> xc;
    for (const auto& d : trace.densities) xc.push_back(center_of_mass(d));
    for (std::size_t k = 2; k + 1 < xc.size(); ++k) CHECK(xc[k + 1] < xc[k]);
    // and the end point agrees with ED qualitatively: n_0 dominates n_5
    const auto& last = trace.densities.back();
    CHECK(last[0] > last[5]);
  }

  SECTION("success probability is non-increasing") {
    TrotterPlan plan = trotter_plan(spec, 0.1, Scheme::GLOBAL);
    EvolutionTrace trace = evolve_exact(plan, psi0, 10);
    for (std::size_t k = 1; k < trace.success_prob.size(); ++k)
      CHECK(trace.success_prob[k] <= trace.success_prob[k - 1] + 1e-12);
  }
}

TEST_CASE("trotter invariants") {
  SECTION("scheme equivalence at HN L = 4 with O(dt) convergence") {
    ModelSpec spec{ModelKind::HN, 4, 1.0, 0.5, 0.0};
    StateVector psi0(4);
    psi0.amps[1 << 1] = 1.0 / std::sqrt(2.0);
    psi0.amps[1 << 2] = 1.0 / std::sqrt(2.0);
    const double T = 1.0;
    StateVector ed = evolve_ed(spec, psi0, T);

    double prev_global = 0.0, prev_local = 0.0;
    int idx = 0;
    for (double dt : {0.1, 0.05, 0.025}) {
      const int steps = static_cast<int>(std::lround(T / dt));
      EvolutionTrace g = evolve_exact(trotter_plan(spec, dt, Scheme::GLOBAL), psi0, steps);
      EvolutionTrace l = evolve_exact(local_style_hn_plan(spec, dt), psi0, steps);
      const double eg = std::sqrt(infidelity(g.final_state, ed));
      const double el = std::sqrt(infidelity(l.final_state, ed));
      const double cross = std::sqrt(infidelity(g.final_state, l.final_state));
      CHECK(cross < 10 * (eg + el) + 1e-8);
      if (idx > 0) {
        // state error is first order: halving dt roughly halves it
        CHECK(eg < prev_global / 1.6);
        CHECK(el < prev_local / 1.6);
      }
      prev_global = eg;
      prev_local = el;
      ++idx;
    }
  }

  SECTION("normalized densities are invariant under the dilation rescale") {
    ModelSpec spec{ModelKind::HN, 4, 1.0, 0.5, 0.0};
    TrotterPlan plan = trotter_plan(spec, 0.1, Scheme::GLOBAL);
    StateVector psi0 = init_basis(Bitstring(4, 0b0110));
    EvolutionTrace trace = evolve_exact(plan, psi0, 5);
    // direct R product without any u factors
    const MatX R = global_step_operator(spec, 0.1);
    VecX direct = psi0.amps;
    for (int k = 0; k < 5; ++k) direct = R * direct;
    StateVector ref(4, direct);
    CHECK((trace.densities.back() - density(ref)).cwiseAbs().maxCoeff() < 1e-10);
  }

  SECTION("reflection symmetry at gamma = 0") {
    ModelSpec herm{ModelKind::HN, 6, 1.0, 0.0, 0.0};
    TrotterPlan plan = trotter_plan(herm, 0.1, Scheme::GLOBAL);
    EvolutionTrace trace = evolve_exact(plan, symmetric_pair_state(6), 10);
    for (const auto& d : trace.densities) {
      for (int i = 0; i < 3; ++i) CHECK(d[i] == Catch::Approx(d[5 - i]).margin(1e-10));
      CHECK(center_of_mass(d) == Catch::Approx(2.5).margin(1e-9));
    }
  }

  SECTION("fermion number is conserved") {
    ModelSpec spec{ModelKind::HN_INT, 6, 1.0, 0.5, 5.0};
    TrotterPlan plan = trotter_plan(spec, 0.1, Scheme::GLOBAL);
    StateVector psi0 = init_basis(Bitstring(6, 0b011110));
    EvolutionTrace trace = evolve_exact(plan, psi0, 8);
    for (const auto& d : trace.densities) CHECK(d.sum() == Catch::Approx(4.0).epsilon(1e-8));
  }
}

TEST_CASE("deferred measurement") {
  ModelSpec spec{ModelKind::HN, 4, 1.0, 0.5, 0.0};
  TrotterPlan plan = trotter_plan(spec, 0.1, Scheme::GLOBAL);
  StateVector psi0 = init_basis(Bitstring(4, 0b0110));
  SECTION("equals per-step projection when each ancilla is bound once") {
    EvolutionTrace a = evolve_exact(plan, psi0, 1, false);
    EvolutionTrace b = evolve_exact(plan, psi0, 1, true);
    CHECK((a.final_state.amps - b.final_state.amps).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("rejected when ancillas would be reused") {
    CHECK_THROWS_AS(evolve_exact(plan, psi0, 2, true), std::invalid_argument);
  }
}

TEST_CASE("sampled evolution") {
  ModelSpec spec{ModelKind::HN, 4, 1.0, 0.5, 0.0};
  TrotterPlan plan = trotter_plan(spec, 0.1, Scheme::GLOBAL);
  StateVector psi0(4);
  psi0.amps[1 << 1] = 1.0 / std::sqrt(2.0);
  psi0.amps[1 << 2] = 1.0 / std::sqrt(2.0);

  SECTION("fixed seed reproduces the trace") {
    EvolutionTrace a = evolve_sampled(plan, psi0, 5, 2000, 99);
    EvolutionTrace b = evolve_sampled(plan, psi0, 5, 2000, 99);
    for (std::size_t k = 0; k < a.densities.size(); ++k) {
      CHECK((a.densities[k] - b.densities[k]).cwiseAbs().maxCoeff() == 0.0);
      CHECK(a.kept_shots[k] == b.kept_shots[k]);
    }
  }

  SECTION("densities converge to the exact trace at 1e6 shots") {
    EvolutionTrace exact = evolve_exact(plan, psi0, 5);
    EvolutionTrace sampled = evolve_sampled(plan, psi0, 5, 1000000, 7);
    for (std::size_t k = 0; k < exact.densities.size(); ++k) {
      const double n = static_cast<double>(sampled.kept_shots[k]);
      for (int i = 0; i < 4; ++i) {
        const double p = exact.densities[k][i];
        const double sigma = std::sqrt(std::max(p * (1 - p), 1e-12) / n);
        CHECK(std::abs(sampled.densities[k][i] - p) < 5 * sigma + 1e-6);
      }
    }
  }

  SECTION("post-selection fraction tracks the cumulative success probability") {
    EvolutionTrace exact = evolve_exact(plan, psi0, 10);
    EvolutionTrace sampled = evolve_sampled(plan, psi0, 10, 160000, 13);
    const double p = exact.success_prob.back();
    const double sigma = std::sqrt(p * (1 - p) / 160000.0);
    CHECK(std::abs(postselection_fraction(sampled) - p) < 3 * sigma);
    CHECK_THROWS_AS(postselection_fraction(exact), std::invalid_argument);
  }

  SECTION("surviving fraction shrinks like 1/2^A on engineered half-success blocks") {
    // two qubits, each with its own strong loss channel; |+>|+> halves per ancilla
    TrotterPlan half;
    half.scheme = Scheme::LOCAL;
    half.dt = 1.0;
    half.num_physical = 2;
    half.num_ancillas = 2;
    const DilatedUnitary d = dilate_single_loss(20.0);
    for (int q = 0; q < 2; ++q) {
      TrotterLayer layer;
      layer.targets = {q};
      layer.op = register_matrix(d);
      layer.nonunitary = true;
      layer.ancilla = q;
      layer.rescale_u = d.rescale_u;
      half.layers.push_back(layer);
    }
    StateVector plus2(2);
    plus2.amps.setConstant(0.5);
    EvolutionTrace trace = evolve_sampled(half, plus2, 1, 100000, 21);
    const double frac = postselection_fraction(trace);
    CHECK(frac > 0.25 - 3 * std::sqrt(0.25 * 0.75 / 100000.0) - 1e-9);
    CHECK(frac < 0.25 + 3 * std::sqrt(0.25 * 0.75 / 100000.0) + 1e-9);
  }

  SECTION("fraction decreases with step count for gamma > 0") {
    // the exact cumulative success is non-increasing; sampled counts follow
    // it up to binomial noise (3 sigma at 50000 shots is ~335 shots)
    EvolutionTrace t = evolve_sampled(plan, psi0, 8, 50000, 3);
    for (std::size_t k = 1; k < t.kept_shots.size(); ++k)
      CHECK(t.kept_shots[k] <= t.kept_shots[k - 1] + 350);
    CHECK(t.kept_shots.back() < t.kept_shots.front());
  }
}
