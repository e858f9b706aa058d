// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nhsim/vqa.hpp"

using namespace nhsim;

namespace {

Eigen::VectorXd random_params(int count, std::uint64_t seed, double scale = M_PI) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd p(count);
  for (int i = 0; i < count; ++i)
    p[i] = scale * (2.0 * detail::uniform53(rng) - 1.0);
  return p;
}

}  // namespace

TEST_CASE("u3 gate") {
  SECTION("zero angles give the identity") {
    CHECK((u3(0, 0, 0) - MatX::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("u3(pi, 0, pi) is X") {
    MatX g = u3(M_PI, 0, M_PI);
    CHECK(std::abs(g(0, 1) - cxd{1.0, 0.0}) < 1e-15);
    CHECK(std::abs(g(1, 0) - cxd{1.0, 0.0}) < 1e-15);
    CHECK(std::abs(g(0, 0)) < 1e-15);
  }
  SECTION("unitary for random angles") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 1000; ++t) {
      const double a = detail::uniform53(rng) * 6, b = detail::uniform53(rng) * 6,
                   c = detail::uniform53(rng) * 6;
      MatX g = u3(a, b, c);
      CHECK((g.adjoint() * g - MatX::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("ansatz structure") {
  AnsatzSpec spec{9, 4};
  CHECK(spec.param_count() == 3 * 9 * 5);
  CHECK(spec.entanglers_per_layer() == 16);  // 3L - 2 at the L = 6 + 3 register

  SECTION("all-zero parameters leave |0...0> fixed") {
    AnsatzSpec small{4, 2};
    StateVector vac = init_basis(Bitstring(4, 0));
    StateVector out = ansatz_apply(small, Eigen::VectorXd::Zero(small.param_count()), vac);
    CHECK(std::abs(out.amps[0] - cxd{1.0, 0.0}) < 1e-14);
  }
  SECTION("norm is preserved") {
    AnsatzSpec small{3, 2};
    std::mt19937_64 rng(8);
    StateVector s(3);
    for (Eigen::Index i = 0; i < 8; ++i)
      s.amps[i] = cxd{detail::uniform53(rng) - 0.5, detail::uniform53(rng) - 0.5};
    StateVector out = ansatz_apply(small, random_params(small.param_count(), 5), s);
    CHECK(norm2(out) == Catch::Approx(norm2(s)).epsilon(1e-12));
  }
  SECTION("matches a dense matrix product at 2 qubits, 1 layer") {
    AnsatzSpec two{2, 1};
    Eigen::VectorXd p = random_params(two.param_count(), 12);
    // dense oracle: leading column, layer column, then CX(0->1) twice per round
    MatX cx = MatX::Zero(4, 4);
    cx(0, 0) = cx(1, 3) = cx(3, 1) = cx(2, 2) = 1.0;  // flips qubit 1 when qubit 0 is up
    auto col = [&](int off) {
      MatX m = MatX::Zero(4, 4);
      const MatX g0 = u3(p[off], p[off + 1], p[off + 2]);
      const MatX g1 = u3(p[off + 3], p[off + 4], p[off + 5]);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) m.block(2 * a, 2 * b, 2, 2) = g1(a, b) * g0;
      return m;
    };
    const MatX dense = cx * cx * col(6) * col(0);
    StateVector vac = init_basis(Bitstring(2, 0));
    StateVector out = ansatz_apply(two, p, vac);
    VecX expect = dense.col(0);
    CHECK((out.amps - expect).cwiseAbs().maxCoeff() < 1e-13);
  }
  SECTION("parameter count mismatch throws") {
    AnsatzSpec small{3, 1};
    CHECK_THROWS_AS(
        ansatz_apply(small, Eigen::VectorXd::Zero(5), init_basis(Bitstring(3, 0))),
        std::invalid_argument);
  }
}

TEST_CASE("target_apply delegates to the exact evolution") {
  ModelSpec spec{ModelKind::HN, 4, 1.0, 0.5, 0.0};
  TrotterPlan plan = trotter_plan(spec, 0.1, Scheme::GLOBAL);
  StateVector psi0 = init_basis(Bitstring(4, 0b0110));
  TargetState t = target_apply(plan, psi0, 10);
  EvolutionTrace trace = evolve_exact(plan, psi0, 10);
  CHECK(norm2(t.state) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(t.success_amplitude ==
        Catch::Approx(std::sqrt(trace.success_prob.back())).epsilon(1e-12));
  StateVector ref = trace.final_state;
  ref.amps /= std::sqrt(norm2(ref));
  CHECK((t.state.amps - ref.amps).cwiseAbs().maxCoeff() < 1e-12);

  SECTION("unitary plan has unit success amplitude") {
    ModelSpec herm{ModelKind::HN, 4, 1.0, 0.0, 0.0};
    TargetState tu = target_apply(trotter_plan(herm, 0.1, Scheme::GLOBAL), psi0, 5);
    CHECK(tu.success_amplitude == Catch::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("cost function") {
  AnsatzSpec spec{3, 2};
  StateVector psi0 = init_basis(Bitstring(3, 0));
  Eigen::VectorXd p = random_params(spec.param_count(), 7);

  SECTION("preparing the target exactly gives zero") {
    StateVector target = ansatz_apply(spec, p, psi0);
    CHECK(cost(spec, p, psi0, target) == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("orthogonal target gives one") {
    StateVector target = init_basis(Bitstring(3, 5));
    CHECK(cost(spec, Eigen::VectorXd::Zero(spec.param_count()), psi0, target) ==
          Catch::Approx(1.0));
  }
  SECTION("bounded in [0, 1] and phase invariant") {
    std::mt19937_64 rng(10);
    StateVector target = ansatz_apply(spec, random_params(spec.param_count(), 77), psi0);
    for (int t = 0; t < 10; ++t) {
      Eigen::VectorXd q = random_params(spec.param_count(), 100 + t);
      const double c = cost(spec, q, psi0, target);
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
      StateVector rotated = target;
      rotated.amps *= std::exp(cxd{0.0, 2.0 * detail::uniform53(rng)});
      CHECK(cost(spec, q, psi0, rotated) == Catch::Approx(c).margin(1e-12));
    }
  }
  SECTION("random parameters sit well above zero for a trotter target") {
    ModelSpec model{ModelKind::HN, 4, 1.0, 0.5, 0.0};
    TrotterPlan plan = trotter_plan(model, 0.1, Scheme::GLOBAL);
    StateVector phys = init_basis(Bitstring(4, 0b0110));
    TargetState t = target_apply(plan, phys, 10);
    AnsatzSpec big{5, 4};
    StateVector full = detail::attach_ancillas_up(phys, 1);
    double min_c = 1.0;
    for (int s = 0; s < 10; ++s)
      min_c = std::min(min_c, cost(big, random_params(big.param_count(), 200 + s), full,
                                   t.state));
    CHECK(min_c > 0.3);
  }
}

TEST_CASE("finite difference gradient self-consistency") {
  AnsatzSpec spec{3, 1};
  StateVector psi0 = init_basis(Bitstring(3, 0));
  StateVector target = ansatz_apply(spec, random_params(spec.param_count(), 31), psi0);
  Eigen::VectorXd p = random_params(spec.param_count(), 32);
  Eigen::VectorXd g = cost_gradient(spec, p, psi0, target, 1e-5);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    Eigen::VectorXd fwd = p, bwd = p;
    fwd[i] += 1e-5;
    bwd[i] -= 1e-5;
    const double oracle =
        (cost(spec, fwd, psi0, target) - cost(spec, bwd, psi0, target)) / 2e-5;
    CHECK(g[i] == Catch::Approx(oracle).margin(1e-4));
  }
}

TEST_CASE("optimizer") {
  SECTION("planted solutions are recovered on most seeds") {
    AnsatzSpec spec{3, 2};
    StateVector psi0 = init_basis(Bitstring(3, 0));
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      StateVector target =
          ansatz_apply(spec, random_params(spec.param_count(), 1000 + seed), psi0);
      OptimizeResult res = optimize(spec, psi0, target, 6000, seed);
      if (res.best_cost <= 1e-6) ++wins;
    }
    CHECK(wins >= 16);
  }
  SECTION("history is monotone best-so-far and budget exhaustion fills it") {
    AnsatzSpec spec{2, 1};
    StateVector psi0 = init_basis(Bitstring(2, 0));
    StateVector target = init_basis(Bitstring(2, 3));  // not exactly reachable fast
    OptimizeResult res = optimize(spec, psi0, target, 300, 5);
    for (std::size_t k = 1; k < res.history.size(); ++k)
      CHECK(res.history[k] <= res.history[k - 1] + 1e-15);
    if (res.best_cost > 1e-10) CHECK(res.history.size() == 300);
    CHECK(res.evaluations == res.history.size());
  }
  SECTION("deterministic for a fixed seed") {
    AnsatzSpec spec{3, 1};
    StateVector psi0 = init_basis(Bitstring(3, 0));
    StateVector target = ansatz_apply(spec, random_params(spec.param_count(), 9), psi0);
    OptimizeResult a = optimize(spec, psi0, target, 1000, 42);
    OptimizeResult b = optimize(spec, psi0, target, 1000, 42);
    CHECK(a.best_cost == b.best_cost);
    CHECK((a.params - b.params).cwiseAbs().maxCoeff() == 0.0);
  }
}
