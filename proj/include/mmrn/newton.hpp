#pragma once

// Dense Newton system for the surrogate maximization, assembled in the split
// tangent coordinates x = (veck(U); vec(V)) of dimension
// K = d(d-1)/2 + (p-d)d. With A = gamma'Q gamma, Bq = gamma'Q gammaPerp,
// Cq = gammaPerp'Q gammaPerp and S the symmetric multiplier:
//
//   H11 = 1/4 Dd' [I ox (A - S) + (A - S) ox I] Dd
//   H12 = 1/4 Dd' (I - Td)(I ox Bq)
//   H21 = (I ox Bq') Dd
//   H22 = I ox Cq - S ox I
//   rhs = -( veck(skew(A + gamma'L)) ; vec(Bq' ... gammaPerp'(Q gamma + L)) )
//
// so that H x = rhs is the Newton equation Hess[xi] = -grad. H is symmetric
// under the weighted inner product diag(2 I, I); concretely H21 = 2 H12'.

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <optional>
#include <stdexcept>

#include "mmrn/stiefel.hpp"
#include "mmrn/surrogate.hpp"

namespace mmrn {

struct NewtonSystem {
  Matrix H;    // K x K
  Vector rhs;  // K
  Matrix S;    // d x d symmetric multiplier at the base point
  int p = 0;
  int d = 0;
};

[[nodiscard]] inline NewtonSystem build_newton_system(const Surrogate& s,
                                                      const StiefelPoint& gamma,
                                                      const Matrix& gammaPerp,
                                                      const OperatorPack& pack) {
  const int p = gamma.p();
  const int d = gamma.d();
  if (pack.d != d) {
    throw std::invalid_argument("build_newton_system: operator pack dimension "
                                "does not match gamma");
  }
  const Matrix& G = gamma.matrix();
  const Matrix QG = s.Q * G;
  const Matrix QP = s.Q * gammaPerp;
  const Matrix A = G.transpose() * QG;           // d x d
  const Matrix Bq = G.transpose() * QP;          // d x (p-d)
  const Matrix Cq = gammaPerp.transpose() * QP;  // (p-d) x (p-d)
  const Matrix S = surrogate_multiplier(s, G);

  const int m = d * (d - 1) / 2;
  const int r = (p - d) * d;
  const Matrix Id = Matrix::Identity(d, d);
  const Matrix Ipd = Matrix::Identity(p - d, p - d);
  const Matrix AS = A - S;

  NewtonSystem sys;
  sys.p = p;
  sys.d = d;
  sys.S = S;
  sys.H.resize(m + r, m + r);
  sys.H.topLeftCorner(m, m) =
      0.25 * pack.Dd.transpose() *
      (Eigen::kroneckerProduct(Id, AS) + Eigen::kroneckerProduct(AS, Id)) *
      pack.Dd;
  sys.H.topRightCorner(m, r) =
      0.25 * pack.Dd.transpose() *
      (Matrix::Identity(d * d, d * d) - pack.Td) *
      Eigen::kroneckerProduct(Id, Bq);
  sys.H.bottomLeftCorner(r, m) =
      Eigen::kroneckerProduct(Id, Matrix(Bq.transpose())) * pack.Dd;
  sys.H.bottomRightCorner(r, r) =
      Eigen::kroneckerProduct(Id, Cq) - Eigen::kroneckerProduct(S, Ipd);

  const Matrix gradTop = A + G.transpose() * s.L;
  const Matrix gradBottom = gammaPerp.transpose() * (QG + s.L);
  sys.rhs.resize(m + r);
  sys.rhs.head(m) = -veck(skew(gradTop));
  sys.rhs.tail(r) = -vec(gradBottom);
  return sys;
}

/// Exact LU solve of the Newton system. Returns std::nullopt when H is
/// singular to the rank-revealing threshold (the caller falls back to a
/// minimum-norm or steepest-ascent step).
[[nodiscard]] inline std::optional<TangentVector> solve_newton(
    const NewtonSystem& sys, const StiefelPoint& gamma,
    const Matrix& gammaPerp) {
  Eigen::FullPivLU<Matrix> lu(sys.H);
  if (!lu.isInvertible()) {
    return std::nullopt;
  }
  const Vector x = lu.solve(sys.rhs);
  const int d = sys.d;
  const int m = d * (d - 1) / 2;
  return TangentVector(veck_inv(x.head(m), d),
                       unvec(x.tail(x.size() - m), sys.p - d, d),
                       gamma.matrix(), gammaPerp);
}

/// Minimum-norm least-squares solution, used when the LU path reports a
/// singular system.
[[nodiscard]] inline TangentVector solve_newton_min_norm(
    const NewtonSystem& sys, const StiefelPoint& gamma,
    const Matrix& gammaPerp) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sys.H);
  const Vector x = cod.solve(sys.rhs);
  const int d = sys.d;
  const int m = d * (d - 1) / 2;
  return TangentVector(veck_inv(x.head(m), d),
                       unvec(x.tail(x.size() - m), sys.p - d, d),
                       gamma.matrix(), gammaPerp);
}

/// Coordinate vector (veck(U); vec(V)) of a tangent vector.
[[nodiscard]] inline Vector tangent_coords(const TangentVector& xi) {
  Vector out(xi.U.rows() * (xi.U.rows() - 1) / 2 + xi.V.size());
  out.head(xi.U.rows() * (xi.U.rows() - 1) / 2) = veck(xi.U);
  out.tail(xi.V.size()) = vec(xi.V);
  return out;
}

}  // namespace mmrn
