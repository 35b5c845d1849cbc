#pragma once

// Covariance whitening via symmetric eigendecomposition. The optimizer works
// in whitened coordinates Z = (X - mean) * SigmaInvHalf, where the Stiefel
// constraint gamma'gamma = I corresponds to beta' Sigma beta = I for
// beta = SigmaInvHalf * gamma.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

#include "mmrn/dcov.hpp"

namespace mmrn {

enum class RidgePolicy {
  kAuto,   // add a small ridge to all eigenvalues when near-singular
  kError,  // throw instead
};

struct WhitenedData {
  Matrix Z;              // n x p whitened samples (rows)
  Matrix sigmaHalf;      // symmetric square root of the (ridged) covariance
  Matrix sigmaInvHalf;   // its inverse
  Vector mean;           // column means of X (subtracted iff center = true)
  double ridge = 0.0;    // ridge actually added to the eigenvalues
};

/// Whiten the predictors of a sample set. The covariance is always estimated
/// from column-centered X with the 1/(n-1) convention; `center` only controls
/// whether the mean is subtracted from the returned Z (differences Z_k - Z_l,
/// the only quantities the objective sees, are unaffected either way).
///
/// Eigenvalues below 1e-10 * (trace/p) trigger the ridge policy: kAuto adds
/// delta = 1e-8 * (trace/p) to every eigenvalue and records it, kError throws.
[[nodiscard]] inline WhitenedData whiten(const SampleSet& data,
                                         bool center = true,
                                         RidgePolicy policy = RidgePolicy::kAuto) {
  const auto n = data.X.rows();
  const auto p = data.X.cols();
  WhitenedData out;
  out.mean = data.X.colwise().mean();
  const Matrix centered = data.X.rowwise() - out.mean.transpose();
  const Matrix cov =
      centered.transpose() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("whiten: eigendecomposition failed");
  }
  Vector lambda = eig.eigenvalues();
  const double scale = std::max(cov.trace() / static_cast<double>(p), 0.0);
  if (lambda.minCoeff() < 1e-10 * scale || scale == 0.0) {
    if (policy == RidgePolicy::kError) {
      throw std::runtime_error(
          "whiten: covariance not positive definite (smallest eigenvalue " +
          std::to_string(lambda.minCoeff()) + ")");
    }
    out.ridge = 1e-8 * scale;
    if (out.ridge <= 0.0) {
      throw std::runtime_error("whiten: covariance is identically zero");
    }
    lambda.array() += out.ridge;
  }
  const Vector sqrtL = lambda.cwiseSqrt();
  const Matrix& V = eig.eigenvectors();
  out.sigmaHalf = V * sqrtL.asDiagonal() * V.transpose();
  out.sigmaInvHalf = V * sqrtL.cwiseInverse().asDiagonal() * V.transpose();
  out.Z = (center ? centered : data.X) * out.sigmaInvHalf;
  return out;
}

}  // namespace mmrn
