#pragma once

// Empirical distance covariance machinery: pairwise distance matrices, the
// double-centered response kernel, the V-statistic in its two equivalent
// forms, and the log-perturbed smooth objective.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace mmrn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Paired predictor/response samples, one observation per row.
struct SampleSet {
  Matrix X;  // n x p
  Matrix Y;  // n x q

  SampleSet(Matrix X_, Matrix Y_) : X(std::move(X_)), Y(std::move(Y_)) {
    if (X.rows() != Y.rows()) {
      throw std::invalid_argument(
          "SampleSet: X has " + std::to_string(X.rows()) + " rows but Y has " +
          std::to_string(Y.rows()));
    }
    if (X.rows() < 2) {
      throw std::invalid_argument("SampleSet: need at least 2 samples");
    }
    if (!X.allFinite() || !Y.allFinite()) {
      throw std::invalid_argument("SampleSet: non-finite entries");
    }
  }

  [[nodiscard]] int n() const { return static_cast<int>(X.rows()); }
  [[nodiscard]] int p() const { return static_cast<int>(X.cols()); }
  [[nodiscard]] int q() const { return static_cast<int>(Y.cols()); }
};

/// n x n matrix of Euclidean distances between the rows of M.
[[nodiscard]] inline Matrix pairwise_distances(const Matrix& M) {
  if (!M.allFinite()) {
    throw std::invalid_argument("pairwise_distances: non-finite entries");
  }
  const auto n = M.rows();
  Matrix D = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = k + 1; l < n; ++l) {
      const double dist = (M.row(k) - M.row(l)).norm();
      D(k, l) = dist;
      D(l, k) = dist;
    }
  }
  return D;
}

/// Double-centered response distance kernel
///   B_kl = b_kl - bbar_k. - bbar_.l + bbar_..
/// with cached row means and grand mean (b is symmetric, so row and column
/// means coincide).
struct CenteredResponseKernel {
  Matrix B;          // n x n, zero row/column sums
  Vector rowMeans;   // means of the raw distance matrix rows
  double grandMean;  // mean of all raw distances
};

[[nodiscard]] inline CenteredResponseKernel double_center(const Matrix& b) {
  if (b.rows() != b.cols()) {
    throw std::invalid_argument("double_center: matrix must be square");
  }
  CenteredResponseKernel out;
  out.rowMeans = b.rowwise().mean();
  out.grandMean = b.mean();
  out.B = b;
  out.B.colwise() -= out.rowMeans;
  out.B.rowwise() -= out.rowMeans.transpose();
  out.B.array() += out.grandMean;
  return out;
}

/// V-statistic with both kernels centered: (1/n^2) sum_kl A_kl B_kl.
[[nodiscard]] inline double dcov_sq_centered_both(const Matrix& A,
                                                  const Matrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols() || A.rows() != A.cols()) {
    throw std::invalid_argument("dcov_sq_centered_both: shape mismatch");
  }
  const auto n = A.rows();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) {
      acc += A(k, l) * B(k, l);
    }
  }
  return acc / (static_cast<double>(n) * static_cast<double>(n));
}

/// Equivalent single-centered form: (1/n^2) sum_kl a_kl B_kl with a the raw
/// predictor distances and B the double-centered response kernel. The raw
/// diagonal is zero, so the sum runs over the off-diagonal upper triangle,
/// doubled -- a fixed traversal order keeps results reproducible.
[[nodiscard]] inline double dcov_sq_single_centered(const Matrix& a,
                                                    const Matrix& B) {
  if (a.rows() != B.rows() || a.cols() != B.cols() || a.rows() != a.cols()) {
    throw std::invalid_argument("dcov_sq_single_centered: shape mismatch");
  }
  const auto n = a.rows();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = k + 1; l < n; ++l) {
      acc += a(k, l) * B(k, l);
    }
  }
  return 2.0 * acc / (static_cast<double>(n) * static_cast<double>(n));
}

/// Squared distance covariance between the row samples of two matrices.
[[nodiscard]] inline double dcov_sq(const Matrix& U, const Matrix& Y) {
  if (U.rows() != Y.rows()) {
    throw std::invalid_argument("dcov_sq: sample count mismatch");
  }
  const Matrix a = pairwise_distances(U);
  const CenteredResponseKernel kern = double_center(pairwise_distances(Y));
  return dcov_sq_single_centered(a, kern.B);
}

/// Log-perturbed V-statistic from precomputed projected distances:
///   (1/n^2) sum_kl { a_kl - eps log(1 + a_kl/eps) } B_kl.
/// eps = 0 is a documented passthrough to the unperturbed statistic.
[[nodiscard]] inline double perturbed_dcov_from_dist(const Matrix& a,
                                                     const Matrix& B,
                                                     double eps) {
  if (eps < 0.0 || !std::isfinite(eps)) {
    throw std::invalid_argument("perturbed_dcov: eps must be finite and >= 0");
  }
  if (eps == 0.0) {
    return dcov_sq_single_centered(a, B);
  }
  if (a.rows() != B.rows() || a.cols() != B.cols() || a.rows() != a.cols()) {
    throw std::invalid_argument("perturbed_dcov: shape mismatch");
  }
  const auto n = a.rows();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = k + 1; l < n; ++l) {
      const double akl = a(k, l);
      acc += (akl - eps * std::log1p(akl / eps)) * B(k, l);
    }
  }
  return 2.0 * acc / (static_cast<double>(n) * static_cast<double>(n));
}

/// Log-perturbed V-statistic of the projection gamma'Z against the centered
/// response kernel B. Z holds whitened samples as rows.
[[nodiscard]] inline double perturbed_dcov(const Matrix& gamma,
                                           const Matrix& Z, const Matrix& B,
                                           double eps) {
  if (gamma.rows() != Z.cols()) {
    throw std::invalid_argument("perturbed_dcov: gamma rows must match Z cols");
  }
  return perturbed_dcov_from_dist(pairwise_distances(Z * gamma), B, eps);
}

}  // namespace mmrn
