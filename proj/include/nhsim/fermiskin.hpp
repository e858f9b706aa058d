// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nhsim/statevector.hpp"

namespace nhsim {

// Sites are indexed 1..L throughout this module (converted at the boundary
// from the 0-indexed lattice elsewhere).

struct SingleParticleBasis {
  int num_sites = 0;
  std::vector<VecX> vectors;  // vectors[n](x-1) = phi_{n+1}(x)
};

/// Open-boundary sine basis phi_n(x) = sqrt(2/(L+1)) sin(pi n x/(L+1)),
/// orthonormal in the Hermitian limit.
inline SingleParticleBasis hn_basis(int L, int N = -1) {
  if (L < 1) throw std::invalid_argument("hn_basis: L must be >= 1");
  if (N < 0) N = L;
  if (N > L) throw std::invalid_argument("hn_basis: N must be <= L");
  SingleParticleBasis basis;
  basis.num_sites = L;
  const double norm = std::sqrt(2.0 / (L + 1));
  for (int n = 1; n <= N; ++n) {
    VecX v(L);
    for (int x = 1; x <= L; ++x)
      v[x - 1] = norm * std::sin(M_PI * n * x / (L + 1));
    basis.vectors.push_back(std::move(v));
  }
  return basis;
}

/// Entrywise e^{-kappa x} deformation of every basis vector.
inline SingleParticleBasis skin_deform(const SingleParticleBasis& basis, double kappa) {
  if (!std::isfinite(kappa)) throw std::invalid_argument("skin_deform: kappa must be finite");
  SingleParticleBasis out;
  out.num_sites = basis.num_sites;
  for (const auto& v : basis.vectors) {
    VecX w(v.size());
    for (Eigen::Index x = 0; x < v.size(); ++x)
      w[x] = v[x] * std::exp(-kappa * static_cast<double>(x + 1));
    out.vectors.push_back(std::move(w));
  }
  return out;
}

struct OverlapMatrix {
  MatX B;
  double kappa = std::numeric_limits<double>::quiet_NaN();
};

/// Gram matrix of the first N deformed vectors, B_mn = <phibar_m|phibar_n>.
inline OverlapMatrix overlap_matrix(const SingleParticleBasis& deformed, int N,
                                    double kappa_meta = std::numeric_limits<double>::quiet_NaN()) {
  if (N < 1 || N > static_cast<int>(deformed.vectors.size()))
    throw std::invalid_argument("overlap_matrix: bad N");
  OverlapMatrix out;
  out.kappa = kappa_meta;
  out.B = MatX(N, N);
  for (int m = 0; m < N; ++m)
    for (int n = 0; n < N; ++n)
      out.B(m, n) = deformed.vectors[static_cast<std::size_t>(m)].dot(
          deformed.vectors[static_cast<std::size_t>(n)]);
  return out;
}

/// Closed-form overlap matrix for the skin-deformed sine basis.
inline OverlapMatrix overlap_matrix_hn_analytic(int L, double kappa, int N) {
  if (L < 1 || N < 1 || N > L) throw std::invalid_argument("overlap_matrix_hn_analytic: bad L/N");
  if (kappa < 0.0) throw std::invalid_argument("overlap_matrix_hn_analytic: kappa must be >= 0");
  OverlapMatrix out;
  out.kappa = kappa;
  if (kappa == 0.0) {
    out.B = MatX::Identity(N, N);
    return out;
  }
  out.B = MatX(N, N);
  const double Lp = L + 1.0;
  for (int m = 1; m <= N; ++m)
    for (int n = 1; n <= N; ++n) {
      const double sgn = ((m + n) % 2 == 0) ? 1.0 : -1.0;
      const double num = (1.0 - sgn * std::exp(-2.0 * kappa * Lp)) *
                         std::sinh(2.0 * kappa) * std::sin(m * M_PI / Lp) *
                         std::sin(n * M_PI / Lp);
      const double den = Lp * (std::cosh(2.0 * kappa) - std::cos(M_PI * (m + n) / Lp)) *
                         (std::cosh(2.0 * kappa) - std::cos(M_PI * (m - n) / Lp));
      out.B(m - 1, n - 1) = num / den;
    }
  return out;
}

namespace fsdetail {

// Thin SVD of the L x N matrix whose columns are the occupied deformed
// vectors. Its Gram matrix is B, so b_nu = s_nu^2, the overlap eigenvectors
// are the right singular vectors, and the mode densities come out as
// n_nu(x) = |U(x, nu)|^2. Working on the column matrix instead of B keeps
// the exponential grading from being squared before the decomposition.
template <typename Real>
struct SvdCore {
  Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> mode_density;  // L x N
  std::vector<Real> singular_values;                                 // descending
};

template <typename Real>
SvdCore<Real> svd_core(const SingleParticleBasis& deformed, int N) {
  using CScalar = std::complex<Real>;
  using Mat = Eigen::Matrix<CScalar, Eigen::Dynamic, Eigen::Dynamic>;
  const int L = deformed.num_sites;
  Mat G(L, N);
  for (int n = 0; n < N; ++n)
    for (int x = 0; x < L; ++x)
      G(x, n) = CScalar(static_cast<Real>(deformed.vectors[static_cast<std::size_t>(n)][x].real()),
                        static_cast<Real>(deformed.vectors[static_cast<std::size_t>(n)][x].imag()));
  Eigen::JacobiSVD<Mat> svd(G, Eigen::ComputeThinU);
  SvdCore<Real> core;
  core.mode_density.resize(L, N);
  for (int x = 0; x < L; ++x)
    for (int nu = 0; nu < N; ++nu)
      core.mode_density(x, nu) = std::norm(svd.matrixU()(x, nu));
  for (int nu = 0; nu < N; ++nu)
    core.singular_values.push_back(svd.singularValues()[nu]);
  return core;
}

}  // namespace fsdetail

struct DensityResult {
  Eigen::VectorXd n_x;
  double condition_number = 1.0;  // of B, i.e. (s_max/s_min)^2
  bool extended_precision = false;
};

constexpr double kOverlapCondEscalate = 1e12;

/// Many-body density n_x = sum_{mn} phibar_m^*(x) [B^{-1}]_{mn} phibar_n(x),
/// evaluated as the diagonal of the orthogonal projector onto the occupied
/// deformed span (identical by B = G^dag G). B supplies metadata and the
/// declared overlap; the decomposition works on the vectors. When cond(B)
/// passes 1e12 the computation escalates to long double and says so.
inline DensityResult density_from_overlap(const SingleParticleBasis& deformed,
                                          const OverlapMatrix& B, int N) {
  if (N < 1 || N > static_cast<int>(deformed.vectors.size()))
    throw std::invalid_argument("density_from_overlap: bad N");
  if (B.B.rows() != N || B.B.cols() != N)
    throw std::invalid_argument("density_from_overlap: B dimension != N");
  const int L = deformed.num_sites;

  auto run = [&](auto tag) -> DensityResult {
    using Real = decltype(tag);
    const auto core = fsdetail::svd_core<Real>(deformed, N);
    DensityResult r;
    const Real smax = core.singular_values.front();
    const Real smin = core.singular_values.back();
    if (!(smin > Real(0)))
      throw std::runtime_error(
          "density_from_overlap: B numerically singular (condition estimate > " +
          std::to_string(1.0 / std::numeric_limits<double>::epsilon()) + ")");
    const Real c = (smax / smin) * (smax / smin);
    r.condition_number = static_cast<double>(c);
    r.n_x = Eigen::VectorXd(L);
    for (int x = 0; x < L; ++x) {
      Real acc = 0;
      for (int nu = 0; nu < N; ++nu) acc += core.mode_density(x, nu);
      r.n_x[x] = static_cast<double>(acc);
    }
    return r;
  };

  DensityResult result = run(double{});
  if (result.condition_number > kOverlapCondEscalate) {
    result = run((long double){});
    result.extended_precision = true;
  }
  return result;
}

struct FermiFit {
  double beta = 0.0;
  double mu = 0.0;
  double rms = 0.0;
  bool beta_capped = false;
};

constexpr double kFermiBetaCap = 60.0;

/// Least-squares fit of 1/(1 + e^{beta (x - mu)}) over x = 1..L with
/// grid-seeded multi-start Levenberg-Marquardt; deterministic given the
/// grid. beta is clamped to [1e-3, 60]; a fit pinned at the cap is flagged.
inline FermiFit fit_fermi_dirac(const Eigen::VectorXd& n_x) {
  const int L = static_cast<int>(n_x.size());
  if (L < 4) throw std::invalid_argument("fit_fermi_dirac: profile length must be >= 4");

  auto model = [](double beta, double mu, double x) {
    const double z = std::clamp(beta * (x - mu), -500.0, 500.0);
    return 1.0 / (1.0 + std::exp(z));
  };
  auto cost = [&](double beta, double mu) {
    double c = 0.0;
    for (int x = 1; x <= L; ++x) {
      const double r = model(beta, mu, x) - n_x[x - 1];
      c += r * r;
    }
    return c;
  };

  double best_beta = 0.1, best_mu = 0.0;
  double best_cost = std::numeric_limits<double>::infinity();

  for (int bi = 0; bi < 25; ++bi) {
    const double beta0 = 0.1 * std::pow(20.0 / 0.1, bi / 24.0);
    for (int mi = 0; mi <= 40; ++mi) {
      const double mu0 = L * (mi / 40.0);
      double beta = beta0, mu = mu0, lambda = 1e-3;
      double c = cost(beta, mu);
      for (int it = 0; it < 120; ++it) {
        // residuals and Jacobian of the logistic model
        double jtj00 = 0, jtj01 = 0, jtj11 = 0, jtr0 = 0, jtr1 = 0;
        for (int x = 1; x <= L; ++x) {
          const double f = model(beta, mu, x);
          const double r = f - n_x[x - 1];
          const double d = -f * (1.0 - f);
          const double jb = d * (x - mu);
          const double jm = d * (-beta);
          jtj00 += jb * jb;
          jtj01 += jb * jm;
          jtj11 += jm * jm;
          jtr0 += jb * r;
          jtr1 += jm * r;
        }
        const double a00 = jtj00 + lambda, a11 = jtj11 + lambda;
        const double det = a00 * a11 - jtj01 * jtj01;
        if (std::abs(det) < 1e-300) break;
        const double db = (a11 * jtr0 - jtj01 * jtr1) / det;
        const double dm = (a00 * jtr1 - jtj01 * jtr0) / det;
        const double nb = std::clamp(beta - db, 1e-3, kFermiBetaCap);
        const double nm = mu - dm;
        const double nc = cost(nb, nm);
        if (nc < c) {
          beta = nb;
          mu = nm;
          c = nc;
          lambda = std::max(lambda * 0.3, 1e-12);
          if (c < 1e-30) break;
        } else {
          lambda *= 10.0;
          if (lambda > 1e10) break;
        }
      }
      if (c < best_cost) {
        best_cost = c;
        best_beta = beta;
        best_mu = mu;
      }
    }
  }

  FermiFit fit;
  fit.beta = best_beta;
  fit.mu = best_mu;
  fit.rms = std::sqrt(best_cost / L);
  fit.beta_capped = best_beta >= kFermiBetaCap - 1e-9;
  return fit;
}

/// Mode-resolved skin densities and totals.
struct SkinDecomposition {
  std::vector<Eigen::VectorXd> mode_densities;  // n_nu(x), nu ordered by b_nu desc
  Eigen::VectorXd total;                        // n_x = sum_nu n_nu(x)
  Eigen::VectorXd b_values;                     // overlap eigenvalues b_nu
  FermiFit fit;                                 // Fermi-Dirac fit of the total
  double condition_number = 1.0;
  bool extended_precision = false;
};

/// Eigen-decomposes B via the same column-matrix SVD (b_nu = s_nu^2) and
/// builds n_nu(x) = b_nu^{-1} |phi_nu^dag . phibar(x)|^2 = |U(x, nu)|^2.
inline SkinDecomposition mode_decomposition(const SingleParticleBasis& deformed,
                                            const OverlapMatrix& B) {
  const int N = static_cast<int>(B.B.rows());
  if (N < 1 || N > static_cast<int>(deformed.vectors.size()))
    throw std::invalid_argument("mode_decomposition: bad overlap size");
  const int L = deformed.num_sites;

  auto run = [&](auto tag) -> SkinDecomposition {
    using Real = decltype(tag);
    const auto core = fsdetail::svd_core<Real>(deformed, N);
    SkinDecomposition out;
    const Real smax = core.singular_values.front();
    const Real smin = core.singular_values.back();
    out.condition_number =
        smin > Real(0) ? static_cast<double>((smax / smin) * (smax / smin))
                       : std::numeric_limits<double>::infinity();
    out.b_values = Eigen::VectorXd(N);
    out.total = Eigen::VectorXd::Zero(L);
    for (int nu = 0; nu < N; ++nu) {
      const Real s = core.singular_values[static_cast<std::size_t>(nu)];
      out.b_values[nu] = static_cast<double>(s * s);
      Eigen::VectorXd mode(L);
      for (int x = 0; x < L; ++x) mode[x] = static_cast<double>(core.mode_density(x, nu));
      out.total += mode;
      out.mode_densities.push_back(std::move(mode));
    }
    return out;
  };

  SkinDecomposition out = run(double{});
  if (!(out.condition_number < kOverlapCondEscalate)) {
    out = run((long double){});
    out.extended_precision = true;
  }
  out.fit = fit_fermi_dirac(out.total);
  return out;
}

/// Independent N-fermion oracle: enumerates all C(L, N) occupation
/// configurations, builds each Slater amplitude as an N x N determinant of
/// the occupied vectors, and accumulates |amp|^2 site weights. Normalized
/// so the densities sum to N.
inline Eigen::VectorXd slater_density_bruteforce(const SingleParticleBasis& deformed, int N) {
  const int L = deformed.num_sites;
  if (L > 12) throw std::invalid_argument("slater_density_bruteforce: L over enumeration cap");
  if (N < 1 || N > L || N > static_cast<int>(deformed.vectors.size()))
    throw std::invalid_argument("slater_density_bruteforce: bad N");

  // per-vector rescaling does not change n_x; normalize to tame the grading
  std::vector<VecX> vecs;
  for (int n = 0; n < N; ++n) {
    VecX v = deformed.vectors[static_cast<std::size_t>(n)];
    const double a = v.cwiseAbs().maxCoeff();
    if (a == 0.0) throw std::invalid_argument("slater_density_bruteforce: zero vector");
    vecs.push_back(v / a);
  }

  std::vector<int> cfg(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) cfg[static_cast<std::size_t>(i)] = i;
  Eigen::VectorXd weight_at = Eigen::VectorXd::Zero(L);
  double total = 0.0;
  MatX M(N, N);
  while (true) {
    for (int m = 0; m < N; ++m)
      for (int j = 0; j < N; ++j)
        M(m, j) = vecs[static_cast<std::size_t>(m)][cfg[static_cast<std::size_t>(j)]];
    const double w = std::norm(M.determinant());
    total += w;
    for (int j = 0; j < N; ++j) weight_at[cfg[static_cast<std::size_t>(j)]] += w;

    // next combination in lexicographic order
    int i = N - 1;
    while (i >= 0 && cfg[static_cast<std::size_t>(i)] == L - N + i) --i;
    if (i < 0) break;
    ++cfg[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < N; ++j)
      cfg[static_cast<std::size_t>(j)] = cfg[static_cast<std::size_t>(j - 1)] + 1;
  }
  if (total <= 0.0)
    throw std::runtime_error("slater_density_bruteforce: vanishing total weight");
  return weight_at / total;
}

}  // namespace nhsim
