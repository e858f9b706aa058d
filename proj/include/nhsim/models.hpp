// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/LU>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "nhsim/dilation.hpp"
#include "nhsim/statevector.hpp"

namespace nhsim {

enum class ModelKind { HN, NHSSH, HN_INT };
enum class Scheme { LOCAL, GLOBAL };

constexpr int kDenseCap = 14;  // largest register handled by dense oracles

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::HN: return "hn";
    case ModelKind::NHSSH: return "nhssh";
    case ModelKind::HN_INT: return "hn-int";
  }
  return "?";
}

inline std::string to_string(Scheme s) {
  return s == Scheme::LOCAL ? "local" : "global";
}

/// Open-boundary spin chain parameters. J and gamma are the symmetric and
/// non-reciprocal parts of the hopping; U_int is the nearest-neighbor
/// density-density strength (HN_INT only).
struct ModelSpec {
  ModelKind kind = ModelKind::HN;
  int length = 2;
  double J = 1.0;
  double gamma = 0.0;
  double U_int = 0.0;

  void validate() const {
    if (length < 2) throw std::invalid_argument("ModelSpec: length must be >= 2");
    if (kind == ModelKind::NHSSH && (length % 2) != 0)
      throw std::invalid_argument("ModelSpec: nhssh requires even length");
    if (!(std::abs(gamma) < J))
      throw std::invalid_argument("ModelSpec: requires |gamma| < J");
  }
};

/// kappa = (1/2) ln((J+gamma)/(J-gamma)); the skin localization exponent.
inline double kappa(double J, double gamma) {
  if (!(std::abs(gamma) < J))
    throw std::invalid_argument("kappa: requires |gamma| < J");
  return 0.5 * std::log((J + gamma) / (J - gamma));
}

namespace pauli {
inline MatX xplus() {  // |up><down|, up = bit 1
  MatX m = MatX::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}
inline MatX xminus() {
  MatX m = MatX::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}
inline MatX x() {
  MatX m = MatX::Zero(2, 2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}
inline MatX y() {
  MatX m = MatX::Zero(2, 2);
  m(0, 1) = cxd{0.0, -1.0};
  m(1, 0) = cxd{0.0, 1.0};
  return m;
}
inline MatX z() {
  MatX m = MatX::Zero(2, 2);
  m(0, 0) = -1.0;
  m(1, 1) = 1.0;
  return m;
}
inline MatX nop() {
  MatX m = MatX::Zero(2, 2);
  m(1, 1) = 1.0;
  return m;
}
}  // namespace pauli

/// kron(higher-qubit op, lower-qubit op) for a two-site operator on the
/// pair (j, j+1), as a 4x4 with bit 0 = site j.
inline MatX two_site(const MatX& at_j, const MatX& at_j1) {
  MatX out(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      out.block(2 * a, 2 * b, 2, 2) = at_j1(a, b) * at_j;
  return out;
}

/// Matrix exponential by scaling-and-squaring with diagonal Pade
/// approximants (degrees 3/5/7/9/13 chosen from the 1-norm).
inline MatX expm(const MatX& M) {
  if (!M.allFinite()) throw std::invalid_argument("expm: non-finite entries");
  const Eigen::Index n = M.rows();
  if (M.cols() != n) throw std::invalid_argument("expm: matrix must be square");

  static const double theta[] = {1.495585217958292e-2, 2.539398330063230e-1,
                                 9.504178996162932e-1, 2.097847961257068e0,
                                 5.371920351148152e0};
  static const std::vector<std::vector<double>> pade_b = {
      {120, 60, 12, 1},
      {30240, 15120, 3360, 420, 30, 1},
      {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1},
      {17643225600, 8821612800, 2075673600, 302702400, 30270240, 2162160,
       110880, 3960, 90, 1},
      {64764752532480000, 32382376266240000, 7771770303897600,
       1187353796428800, 129060195264000, 10559470521600, 670442572800,
       33522128640, 1323241920, 40840800, 960960, 16380, 182, 1}};

  const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
  int idx = 4;
  int squarings = 0;
  for (int i = 0; i < 4; ++i)
    if (norm1 <= theta[i]) {
      idx = i;
      break;
    }
  MatX A = M;
  if (idx == 4 && norm1 > theta[4]) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta[4])));
    A /= std::pow(2.0, squarings);
  }

  const auto& b = pade_b[static_cast<std::size_t>(idx)];
  const MatX A2 = A * A;
  MatX U, V;
  if (idx < 4) {
    MatX even = b[0] * MatX::Identity(n, n);
    MatX odd = b[1] * MatX::Identity(n, n);
    MatX pw = MatX::Identity(n, n);
    for (std::size_t p = 2; p < b.size(); p += 2) {
      pw = pw * A2;
      even += b[p] * pw;
      if (p + 1 < b.size()) odd += b[p + 1] * pw;
    }
    U = A * odd;
    V = even;
  } else {
    const MatX A4 = A2 * A2;
    const MatX A6 = A4 * A2;
    U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 +
             b[5] * A4 + b[3] * A2 + b[1] * MatX::Identity(n, n));
    V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 +
        b[2] * A2 + b[0] * MatX::Identity(n, n);
  }
  MatX F = (V - U).partialPivLu().solve(V + U);
  for (int s = 0; s < squarings; ++s) F = F * F;
  return F;
}

/// e^{+i dt ((J-g) X+_{j+1} X-_j + (J+g) X-_{j+1} X+_j)} on a pair, bit 0 =
/// lower site. Identity on the aligned pair states; non-unitary for g != 0.
inline MatX bond_hn(double J, double gamma, double dt) {
  const MatX gen = (J - gamma) * two_site(pauli::xminus(), pauli::xplus()) +
                   (J + gamma) * two_site(pauli::xplus(), pauli::xminus());
  return expm(cxd{0.0, dt} * gen);
}

/// e^{+i J dt (XX + YY)} on a pair.
inline MatX bond_xy(double J, double dt) {
  const MatX gen = two_site(pauli::x(), pauli::x()) + two_site(pauli::y(), pauli::y());
  return expm(cxd{0.0, J * dt} * gen);
}

/// HN bond with the nearest-neighbor interaction folded into the exponent:
/// exponent gains -U n_j n_{j+1}.
inline MatX bond_hn_int(double J, double gamma, double U, double dt) {
  const MatX gen = (J - gamma) * two_site(pauli::xminus(), pauli::xplus()) +
                   (J + gamma) * two_site(pauli::xplus(), pauli::xminus()) -
                   U * two_site(pauli::nop(), pauli::nop());
  return expm(cxd{0.0, dt} * gen);
}

/// Dense 2^L x 2^L Hamiltonian in the computational basis.
inline MatX hamiltonian_dense(const ModelSpec& spec) {
  spec.validate();
  const int L = spec.length;
  if (L > kDenseCap) throw std::invalid_argument("hamiltonian_dense: length over dense cap");
  const Eigen::Index dim = Eigen::Index{1} << L;
  MatX H = MatX::Zero(dim, dim);

  auto add_two_site = [&](int j, const MatX& bond) {
    // accumulate bond (4x4 on sites j, j+1) into H
    const std::uint64_t mj = std::uint64_t{1} << j;
    const std::uint64_t mj1 = std::uint64_t{1} << (j + 1);
    const std::uint64_t pair = mj | mj1;
    for (std::uint64_t base = 0; base < static_cast<std::uint64_t>(dim); ++base) {
      if (base & pair) continue;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          if (bond(a, b) == cxd{0.0, 0.0}) continue;
          const std::uint64_t row = base | ((a & 1) ? mj : 0) | ((a & 2) ? mj1 : 0);
          const std::uint64_t col = base | ((b & 1) ? mj : 0) | ((b & 2) ? mj1 : 0);
          H(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += bond(a, b);
        }
    }
  };

  const double J = spec.J, g = spec.gamma;
  const MatX hop_asym = -(J + g) * two_site(pauli::xplus(), pauli::xminus()) -
                        (J - g) * two_site(pauli::xminus(), pauli::xplus());
  switch (spec.kind) {
    case ModelKind::HN:
      for (int j = 0; j + 1 < L; ++j) add_two_site(j, hop_asym);
      break;
    case ModelKind::NHSSH: {
      const MatX hop_sym = -(J / 2.0) * (two_site(pauli::x(), pauli::x()) +
                                         two_site(pauli::y(), pauli::y()));
      for (int j = 0; j + 1 < L; j += 2) add_two_site(j, hop_asym);
      for (int j = 1; j + 1 < L; j += 2) add_two_site(j, hop_sym);
      break;
    }
    case ModelKind::HN_INT: {
      const MatX nn = spec.U_int * two_site(pauli::nop(), pauli::nop());
      for (int j = 0; j + 1 < L; ++j) add_two_site(j, hop_asym + nn);
      break;
    }
  }
  return H;
}

/// Embeds a 4x4 pair operator on sites (j, j+1) into the full register.
inline MatX embed_pair(const MatX& bond, int j, int L) {
  const Eigen::Index dim = Eigen::Index{1} << L;
  MatX out = MatX::Zero(dim, dim);
  const std::uint64_t mj = std::uint64_t{1} << j;
  const std::uint64_t mj1 = std::uint64_t{1} << (j + 1);
  const std::uint64_t pair = mj | mj1;
  for (std::uint64_t base = 0; base < static_cast<std::uint64_t>(dim); ++base) {
    if (base & pair) continue;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        const std::uint64_t row = base | ((a & 1) ? mj : 0) | ((a & 2) ? mj1 : 0);
        const std::uint64_t col = base | ((b & 1) ? mj : 0) | ((b & 2) ? mj1 : 0);
        out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = bond(a, b);
      }
  }
  return out;
}

/// One gate application inside a Trotter step. Non-unitary layers hold the
/// register-convention dilated matrix; their targets get the bound ancilla
/// appended as the most significant operator bit at execution time.
struct TrotterLayer {
  std::vector<int> targets;
  MatX op;
  bool nonunitary = false;
  int ancilla = -1;       // ancilla slot, -1 for unitary layers
  double rescale_u = 1.0; // dilation rescale for non-unitary layers
};

struct TrotterPlan {
  Scheme scheme = Scheme::GLOBAL;
  double dt = 0.1;
  int num_physical = 0;
  int num_ancillas = 0;  // per Trotter step; slots are reused across steps
  std::vector<TrotterLayer> layers;  // one step, in application order
  ModelSpec spec;
};

/// The step operator of the GLOBAL scheme: R = (prod of even bonds)(prod of
/// odd bonds), so the odd-bond product acts on the state first.
inline MatX global_step_operator(const ModelSpec& spec, double dt) {
  const int L = spec.length;
  const Eigen::Index dim = Eigen::Index{1} << L;
  const MatX bond = spec.kind == ModelKind::HN_INT
                        ? bond_hn_int(spec.J, spec.gamma, spec.U_int, dt)
                        : bond_hn(spec.J, spec.gamma, dt);
  MatX evens = MatX::Identity(dim, dim);
  MatX odds = MatX::Identity(dim, dim);
  for (int j = 0; j + 1 < L; j += 2) evens = evens * embed_pair(bond, j, L);
  for (int j = 1; j + 1 < L; j += 2) odds = odds * embed_pair(bond, j, L);
  return evens * odds;
}

/// Builds the per-step gate schedule for a model/scheme pairing. LOCAL is
/// the nH-SSH layout (dilated even bonds, one ancilla each, then unitary
/// odd bonds); GLOBAL dilates the whole-register step operator once.
inline TrotterPlan trotter_plan(const ModelSpec& spec, double dt, Scheme scheme) {
  spec.validate();
  TrotterPlan plan;
  plan.scheme = scheme;
  plan.dt = dt;
  plan.spec = spec;
  plan.num_physical = spec.length;

  if (scheme == Scheme::LOCAL) {
    if (spec.kind != ModelKind::NHSSH)
      throw std::invalid_argument("trotter_plan: LOCAL scheme is for nhssh only");
    const int L = spec.length;
    plan.num_ancillas = L / 2;
    const DilatedUnitary d = dilate(bond_hn(spec.J, spec.gamma, dt));
    const MatX reg = register_matrix(d);
    for (int j = 0; j + 1 < L; j += 2) {
      TrotterLayer layer;
      layer.targets = {j, j + 1};
      layer.op = reg;
      layer.nonunitary = true;
      layer.ancilla = j / 2;
      layer.rescale_u = d.rescale_u;
      plan.layers.push_back(layer);
    }
    const MatX xy = bond_xy(spec.J / 2.0, dt);
    for (int j = 1; j + 1 < L; j += 2) {
      TrotterLayer layer;
      layer.targets = {j, j + 1};
      layer.op = xy;
      plan.layers.push_back(layer);
    }
  } else {
    if (spec.kind == ModelKind::NHSSH)
      throw std::invalid_argument("trotter_plan: GLOBAL scheme is for hn/hn-int");
    if (spec.length > kDenseCap - 1)
      throw std::invalid_argument("trotter_plan: global operator over dense cap");
    plan.num_ancillas = 1;
    const DilatedUnitary d = dilate(global_step_operator(spec, dt));
    TrotterLayer layer;
    layer.targets.resize(static_cast<std::size_t>(spec.length));
    for (int q = 0; q < spec.length; ++q) layer.targets[static_cast<std::size_t>(q)] = q;
    layer.op = register_matrix(d);
    layer.nonunitary = true;
    layer.ancilla = 0;
    layer.rescale_u = d.rescale_u;
    plan.layers.push_back(layer);
  }
  return plan;
}

}  // namespace nhsim
