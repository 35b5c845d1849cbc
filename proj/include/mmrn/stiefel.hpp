#pragma once

// Stiefel-manifold primitives: points, tangent vectors, QR retraction,
// orthogonal complements, and the sparse vec/veck operator pack used to
// assemble Newton systems in matrix coordinates.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace mmrn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ===== Elementwise matrix parts =====

/// Symmetric part (W + W') / 2.
[[nodiscard]] inline Matrix sym(const Matrix& W) {
  return 0.5 * (W + W.transpose());
}

/// Skew-symmetric part (W - W') / 2.
[[nodiscard]] inline Matrix skew(const Matrix& W) {
  return 0.5 * (W - W.transpose());
}

/// Column-stacking vectorization.
[[nodiscard]] inline Vector vec(const Matrix& M) {
  return Eigen::Map<const Vector>(M.data(), M.size());
}

/// Inverse of vec for a known target shape.
[[nodiscard]] inline Matrix unvec(const Vector& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols) {
    throw std::invalid_argument("unvec: length " + std::to_string(v.size()) +
                                " does not match " + std::to_string(rows) +
                                "x" + std::to_string(cols));
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

// ===== Stiefel points =====

/// A p x d matrix with orthonormal columns. Construction validates
/// gamma'gamma = I_d to 1e-10 and throws std::invalid_argument otherwise.
class StiefelPoint {
 public:
  static constexpr double kOrthoTol = 1e-10;

  explicit StiefelPoint(Matrix gamma) : m_(std::move(gamma)) {
    if (m_.rows() < m_.cols() || m_.cols() < 1) {
      throw std::invalid_argument(
          "StiefelPoint: need p >= d >= 1, got " + std::to_string(m_.rows()) +
          "x" + std::to_string(m_.cols()));
    }
    const Matrix gram = m_.transpose() * m_;
    const double dev =
        (gram - Matrix::Identity(m_.cols(), m_.cols())).cwiseAbs().maxCoeff();
    if (!(dev <= kOrthoTol)) {
      throw std::invalid_argument(
          "StiefelPoint: columns not orthonormal (max deviation " +
          std::to_string(dev) + ")");
    }
  }

  [[nodiscard]] int p() const { return static_cast<int>(m_.rows()); }
  [[nodiscard]] int d() const { return static_cast<int>(m_.cols()); }
  [[nodiscard]] const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

// ===== Tangent space =====

/// Projection of an ambient p x d matrix W onto the tangent space at gamma:
///   P_gamma(W) = W - gamma * sym(gamma' W).
/// Idempotent, and gamma' P_gamma(W) is skew-symmetric.
[[nodiscard]] inline Matrix tangent_project(const StiefelPoint& gamma,
                                            const Matrix& W) {
  const Matrix& G = gamma.matrix();
  if (W.rows() != G.rows() || W.cols() != G.cols()) {
    throw std::invalid_argument("tangent_project: shape mismatch");
  }
  return W - G * sym(G.transpose() * W);
}

/// Tangent vector in split coordinates: xi = gamma * U + gammaPerp * V with
/// U skew (d x d) and V unconstrained ((p-d) x d). Carries copies of the base
/// point and its orthogonal complement so the ambient form is self-contained.
struct TangentVector {
  Matrix U;      // d x d, skew-symmetric
  Matrix V;      // (p-d) x d
  Matrix base;   // gamma, p x d
  Matrix perp;   // gammaPerp, p x (p-d)

  static constexpr double kSkewTol = 1e-12;

  TangentVector(Matrix U_, Matrix V_, Matrix base_, Matrix perp_)
      : U(std::move(U_)), V(std::move(V_)), base(std::move(base_)),
        perp(std::move(perp_)) {
    const auto d = base.cols();
    const auto p = base.rows();
    if (U.rows() != d || U.cols() != d || V.cols() != d ||
        V.rows() != p - d || perp.rows() != p || perp.cols() != p - d) {
      throw std::invalid_argument("TangentVector: inconsistent shapes");
    }
    const double dev = (U + U.transpose()).cwiseAbs().maxCoeff();
    if (!(dev <= kSkewTol)) {
      throw std::invalid_argument(
          "TangentVector: U not skew-symmetric (max deviation " +
          std::to_string(dev) + ")");
    }
  }

  /// Ambient p x d representation gamma * U + gammaPerp * V.
  [[nodiscard]] Matrix ambient() const { return base * U + perp * V; }

  /// Frobenius norm; equals the ambient norm because [gamma gammaPerp] is
  /// orthogonal.
  [[nodiscard]] double norm() const {
    return std::sqrt(U.squaredNorm() + V.squaredNorm());
  }
};

/// Split coordinates of the tangent projection of an ambient matrix W:
/// U = skew(gamma' W), V = gammaPerp' W. For W already tangent this is the
/// exact coordinate decomposition.
[[nodiscard]] inline TangentVector to_coordinates(const StiefelPoint& gamma,
                                                  const Matrix& gammaPerp,
                                                  const Matrix& W) {
  const Matrix& G = gamma.matrix();
  return TangentVector(skew(G.transpose() * W), gammaPerp.transpose() * W, G,
                       gammaPerp);
}

// ===== Retraction and complement =====

/// QR retraction: the Q factor of gamma + xi, with column signs normalized so
/// the R factor has positive diagonal. xi = 0 returns the base point
/// unchanged. Throws std::runtime_error if gamma + xi is rank deficient
/// (possible only for non-tangent xi).
[[nodiscard]] inline StiefelPoint qr_retract(const StiefelPoint& gamma,
                                             const Matrix& xi) {
  const Matrix& G = gamma.matrix();
  if (xi.rows() != G.rows() || xi.cols() != G.cols()) {
    throw std::invalid_argument("qr_retract: shape mismatch");
  }
  if (xi.isZero(0.0)) {
    return gamma;  // exact: retraction at the zero step is the base point
  }
  const Matrix A = G + xi;
  Eigen::HouseholderQR<Matrix> qr(A);
  Matrix Q = qr.householderQ() * Matrix::Identity(A.rows(), A.cols());
  const Matrix R =
      qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
  const double rmax = R.diagonal().cwiseAbs().maxCoeff();
  for (int j = 0; j < A.cols(); ++j) {
    const double rjj = R(j, j);
    if (std::abs(rjj) <= 1e-12 * std::max(1.0, rmax)) {
      throw std::runtime_error("qr_retract: retraction undefined, gamma + xi "
                               "is rank deficient");
    }
    if (rjj < 0.0) Q.col(j) = -Q.col(j);
  }
  return StiefelPoint(std::move(Q));
}

/// Orthonormal basis of the orthogonal complement of span(gamma): the
/// trailing p-d columns of a full Householder QR of gamma. Column signs are
/// fixed (largest-magnitude entry positive, earliest index on ties) so the
/// result is deterministic for a given gamma.
[[nodiscard]] inline Matrix orth_complement(const StiefelPoint& gamma) {
  const Matrix& G = gamma.matrix();
  const auto p = G.rows();
  const auto d = G.cols();
  Eigen::HouseholderQR<Matrix> qr(G);
  const Matrix Qfull = qr.householderQ() * Matrix::Identity(p, p);
  Matrix P = Qfull.rightCols(p - d);
  for (int j = 0; j < P.cols(); ++j) {
    int imax = 0;
    P.col(j).cwiseAbs().maxCoeff(&imax);
    if (P(imax, j) < 0.0) P.col(j) = -P.col(j);
  }
  return P;
}

// ===== vec/veck operator pack =====

/// veck: strict lower triangle of a skew-symmetric d x d matrix, stacked by
/// columns, length d(d-1)/2. Throws if U deviates from skew-symmetry by more
/// than 1e-12.
[[nodiscard]] inline Vector veck(const Matrix& U) {
  if (U.rows() != U.cols()) {
    throw std::invalid_argument("veck: matrix must be square");
  }
  const double dev = (U + U.transpose()).cwiseAbs().maxCoeff();
  if (!(dev <= 1e-12)) {
    throw std::invalid_argument("veck: input not skew-symmetric (max deviation " +
                                std::to_string(dev) + ")");
  }
  const auto d = U.rows();
  Vector out(d * (d - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j + 1; i < d; ++i) {
      out(k++) = U(i, j);
    }
  }
  return out;
}

/// Inverse of veck: rebuild the skew-symmetric d x d matrix from its stacked
/// strict lower triangle.
[[nodiscard]] inline Matrix veck_inv(const Vector& v, int d) {
  if (v.size() != static_cast<Eigen::Index>(d) * (d - 1) / 2) {
    throw std::invalid_argument("veck_inv: length " + std::to_string(v.size()) +
                                " does not match d = " + std::to_string(d));
  }
  Matrix U = Matrix::Zero(d, d);
  Eigen::Index k = 0;
  for (int j = 0; j < d; ++j) {
    for (int i = j + 1; i < d; ++i) {
      U(i, j) = v(k);
      U(j, i) = -v(k);
      ++k;
    }
  }
  return U;
}

/// Constant duplication/commutation matrices for dimension d:
///   Dd (d^2 x d(d-1)/2): vec(U) = Dd * veck(U) and veck(U) = Dd' vec(U) / 2
///                        for skew-symmetric U;
///   Td (d^2 x d^2):      Td * vec(W) = vec(W') (commutation matrix).
struct OperatorPack {
  int d = 0;
  Matrix Dd;
  Matrix Td;
};

[[nodiscard]] inline OperatorPack build_operator_pack(int d) {
  if (d < 1) {
    throw std::invalid_argument("build_operator_pack: d must be >= 1");
  }
  OperatorPack pack;
  pack.d = d;
  const int m = d * (d - 1) / 2;
  pack.Dd = Matrix::Zero(d * d, m);
  int k = 0;
  for (int j = 0; j < d; ++j) {
    for (int i = j + 1; i < d; ++i) {
      pack.Dd(j * d + i, k) = 1.0;   // entry (i, j) of vec
      pack.Dd(i * d + j, k) = -1.0;  // entry (j, i) of vec
      ++k;
    }
  }
  pack.Td = Matrix::Zero(d * d, d * d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      // W(i, j) sits at vec index j*d + i and must land at (i, j) of vec(W'),
      // i.e. index i*d + j.
      pack.Td(i * d + j, j * d + i) = 1.0;
    }
  }
  return pack;
}

}  // namespace mmrn
