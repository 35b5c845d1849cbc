#pragma once

// Minorizing surrogate of the perturbed distance-covariance objective at a
// base point gammaT:
//
//   g(gamma) = 1/2 tr(gamma' Q gamma) + tr(gamma' L)  (+ constant, dropped)
//
// built from the sign split of the centered response kernel B. Negative
// kernel entries feed the quadratic coefficient Q (negative semidefinite),
// positive entries feed the linear coefficient L. Also provides the
// Riemannian gradient and Hessian of g on the Stiefel manifold; by tangency
// of the minorization these agree at gammaT with those of the perturbed
// objective itself.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

#include "mmrn/dcov.hpp"
#include "mmrn/stiefel.hpp"

namespace mmrn {

struct Surrogate {
  Matrix Q;     // p x p, symmetric, negative semidefinite
  Matrix L;     // p x d
  Matrix base;  // gammaT the surrogate was built at
  double eps = 0.0;
};

/// Graph-Laplacian quadratic form Z' (diag(W 1) - W) Z for a symmetric
/// weight matrix W with zero diagonal. Z holds samples as rows.
[[nodiscard]] inline Matrix laplacian_form(const Matrix& Z, const Matrix& W) {
  const Vector rowSums = W.rowwise().sum();
  const Matrix scaled = rowSums.asDiagonal() * Z;
  return Z.transpose() * (scaled - W * Z);
}

/// Build the surrogate at gammaT from whitened samples Z (n x p, rows) and
/// the centered response kernel B. The split weights are
///   C_kl = B_kl 1(B_kl < 0) / (||gammaT'(Z_k - Z_l)|| + eps),
///   D_kl = B_kl 1(B_kl > 0) / (||gammaT'(Z_k - Z_l)|| + eps),
/// with zero diagonals (diagonal terms of the objective vanish identically,
/// and excluding them avoids 1/eps-scale cancellation in the Laplacian).
/// `dist` must be the pairwise distance matrix of Z * gammaT.
[[nodiscard]] inline Surrogate build_surrogate_from_dist(const Matrix& Z,
                                                         const Matrix& B,
                                                         const Matrix& gammaT,
                                                         const Matrix& dist,
                                                         double eps) {
  const auto n = Z.rows();
  if (B.rows() != n || B.cols() != n || dist.rows() != n || dist.cols() != n ||
      gammaT.rows() != Z.cols()) {
    throw std::invalid_argument("build_surrogate: shape mismatch");
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("build_surrogate: eps must be finite and > 0");
  }
  Matrix C = Matrix::Zero(n, n);
  Matrix D = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = k + 1; l < n; ++l) {
      const double bkl = B(k, l);
      if (bkl == 0.0) continue;
      const double w = bkl / (dist(k, l) + eps);
      if (bkl < 0.0) {
        C(k, l) = w;
        C(l, k) = w;
      } else {
        D(k, l) = w;
        D(l, k) = w;
      }
    }
  }
  const double scale = 2.0 / (static_cast<double>(n) * static_cast<double>(n));
  Surrogate s;
  s.Q = sym(scale * laplacian_form(Z, C));
  s.L = scale * laplacian_form(Z, D) * gammaT;
  s.base = gammaT;
  s.eps = eps;
  return s;
}

[[nodiscard]] inline Surrogate build_surrogate(const Matrix& Z,
                                               const Matrix& B,
                                               const Matrix& gammaT,
                                               double eps) {
  return build_surrogate_from_dist(Z, B, gammaT,
                                   pairwise_distances(Z * gammaT), eps);
}

/// Surrogate value (without the dropped constant).
[[nodiscard]] inline double surrogate_value(const Surrogate& s,
                                            const Matrix& gamma) {
  return 0.5 * (gamma.transpose() * s.Q * gamma).trace() +
         (gamma.transpose() * s.L).trace();
}

/// Symmetric multiplier S = sym(gamma' Q gamma + gamma' L) appearing in the
/// gradient and Hessian.
[[nodiscard]] inline Matrix surrogate_multiplier(const Surrogate& s,
                                                 const Matrix& gamma) {
  return sym(gamma.transpose() * (s.Q * gamma + s.L));
}

/// Riemannian gradient of g at gamma: Q gamma + L - gamma S.
[[nodiscard]] inline Matrix riemannian_gradient(const Surrogate& s,
                                                const Matrix& gamma) {
  const Matrix euclid = s.Q * gamma + s.L;
  return euclid - gamma * sym(gamma.transpose() * euclid);
}

/// Riemannian Hessian of g at xi.base applied to the tangent vector xi, in
/// split coordinates:
///   U_H = skew(gamma'Q gamma U + gamma'Q gammaPerp V - U S),
///   V_H = gammaPerp'Q gamma U + gammaPerp'Q gammaPerp V - V S.
[[nodiscard]] inline TangentVector hessian_apply(const Surrogate& s,
                                                 const TangentVector& xi) {
  const Matrix& G = xi.base;
  const Matrix& P = xi.perp;
  const Matrix QG = s.Q * G;   // p x d
  const Matrix QP = s.Q * P;   // p x (p-d)
  const Matrix S = surrogate_multiplier(s, G);
  const Matrix UH =
      skew(G.transpose() * QG * xi.U + G.transpose() * QP * xi.V - xi.U * S);
  const Matrix VH =
      P.transpose() * QG * xi.U + P.transpose() * QP * xi.V - xi.V * S;
  return TangentVector(UH, VH, G, P);
}

}  // namespace mmrn
