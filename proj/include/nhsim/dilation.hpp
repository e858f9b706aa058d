// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "nhsim/statevector.hpp"

namespace nhsim {

/// One-ancilla unitary embedding of a non-unitary operator. The upper-left
/// block_dim x block_dim block of `matrix` equals rescale_u * R, where
/// rescale_u = 1 / sigma_max(R). In this block layout the first block_dim
/// indices carry the ancilla-up subspace.
struct DilatedUnitary {
  MatX matrix;
  double rescale_u = 1.0;
  Eigen::Index block_dim = 0;
};

/// Closed-form single-qubit loss dilation: R = diag(e^-phi, 1) embedded with
/// C = -sqrt(I - R R^dag), B = -C, D = R.
inline DilatedUnitary dilate_single_loss(double phi) {
  if (!std::isfinite(phi) || phi < 0.0)
    throw std::invalid_argument("dilate_single_loss: phi must be finite and >= 0");
  const double e = std::exp(-phi);
  const double s = std::sqrt(std::max(0.0, 1.0 - e * e));
  DilatedUnitary d;
  d.block_dim = 2;
  d.rescale_u = 1.0;
  d.matrix = MatX::Zero(4, 4);
  d.matrix(0, 0) = e;
  d.matrix(1, 1) = 1.0;
  d.matrix(0, 2) = s;
  d.matrix(2, 0) = -s;
  d.matrix(2, 2) = e;
  d.matrix(3, 3) = 1.0;
  return d;
}

/// Closed-form single-qubit gain dilation: R = diag(1, e^-phi).
inline DilatedUnitary dilate_single_gain(double phi) {
  if (!std::isfinite(phi) || phi < 0.0)
    throw std::invalid_argument("dilate_single_gain: phi must be finite and >= 0");
  const double e = std::exp(-phi);
  const double s = std::sqrt(std::max(0.0, 1.0 - e * e));
  DilatedUnitary d;
  d.block_dim = 2;
  d.rescale_u = 1.0;
  d.matrix = MatX::Zero(4, 4);
  d.matrix(0, 0) = 1.0;
  d.matrix(1, 1) = e;
  d.matrix(1, 3) = s;
  d.matrix(3, 1) = -s;
  d.matrix(2, 2) = 1.0;
  d.matrix(3, 3) = e;
  return d;
}

/// Embeds an arbitrary square non-unitary R (power-of-two dimension) into a
/// doubled unitary. Steps: SVD R = A S B^dag; u = 1/s_max; C = A sqrt(I -
/// u^2 S^2) B^dag; then the remaining blocks come from the QR factor of
/// W = [[uR, I], [C, I]]. QR column phases are fixed so the triangular
/// factor has a nonnegative real diagonal, which pins the first block
/// column to [uR; C] exactly and makes the construction deterministic.
inline DilatedUnitary dilate(const MatX& R) {
  const Eigen::Index m = R.rows();
  if (m == 0 || R.cols() != m) throw std::invalid_argument("dilate: R must be square");
  if ((m & (m - 1)) != 0)
    throw std::invalid_argument("dilate: dimension must be a power of two");
  if (!R.allFinite()) throw std::invalid_argument("dilate: non-finite entries");
  if (R.norm() == 0.0) throw std::invalid_argument("dilate: R must be nonzero");

  Eigen::JacobiSVD<MatX> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  if (!(smax > 0.0) || !sv.allFinite()) throw std::runtime_error("dilate: SVD failure");
  const double u = 1.0 / smax;

  Eigen::VectorXd root(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double us = u * sv(i);
    root(i) = std::sqrt(std::max(0.0, 1.0 - us * us));
  }
  const MatX C = svd.matrixU() * root.asDiagonal() * svd.matrixV().adjoint();

  MatX W(2 * m, 2 * m);
  W.topLeftCorner(m, m) = u * R;
  W.bottomLeftCorner(m, m) = C;
  W.topRightCorner(m, m) = MatX::Identity(m, m);
  W.bottomRightCorner(m, m) = MatX::Identity(m, m);

  Eigen::HouseholderQR<MatX> qr(W);
  MatX Q = qr.householderQ() * MatX::Identity(2 * m, 2 * m);
  const MatX T = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < 2 * m; ++i) {
    const cxd t = T(i, i);
    if (std::abs(t) > 1e-14) Q.col(i) *= t / std::abs(t);
  }

  DilatedUnitary d;
  d.matrix = std::move(Q);
  d.rescale_u = u;
  d.block_dim = m;
  return d;
}

struct DilationReport {
  double unitarity_defect = 0.0;  // max |(U^dag U - I)_ij|
  double block_defect = 0.0;      // max |(U_00 - uR)_ij|
  double u_defect = 0.0;          // |u^2 * lambda_max(R^dag R) - 1|
};

inline DilationReport verify_dilation(const DilatedUnitary& d, const MatX& R) {
  const Eigen::Index m = d.block_dim;
  if (R.rows() != m || R.cols() != m)
    throw std::invalid_argument("verify_dilation: dimension mismatch");
  DilationReport rep;
  const MatX defect = d.matrix.adjoint() * d.matrix -
                      MatX::Identity(d.matrix.rows(), d.matrix.cols());
  rep.unitarity_defect = defect.cwiseAbs().maxCoeff();
  rep.block_defect =
      (d.matrix.topLeftCorner(m, m) - d.rescale_u * R).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<MatX> es(R.adjoint() * R);
  const double lmax = es.eigenvalues().maxCoeff();
  rep.u_defect = std::abs(d.rescale_u * d.rescale_u * lmax - 1.0);
  return rep;
}

/// Same embedding re-indexed for a register where the ancilla is the most
/// significant target bit and spin-up is bit value 1: XOR-conjugates both
/// indices with the block size, so the ancilla-up (bit = 1) subspace carries
/// the uR block.
inline MatX register_matrix(const DilatedUnitary& d) {
  const Eigen::Index n = d.matrix.rows();
  const Eigen::Index m = d.block_dim;
  MatX out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i ^ m, j ^ m) = d.matrix(i, j);
  return out;
}

}  // namespace nhsim
