#pragma once

// Evaluation metrics: projection-distance between estimated and true bases,
// and selection rates for the sparse variant.

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "mmrn/stiefel.hpp"

namespace mmrn {

/// Orthogonal projector onto the column span of a full-column-rank basis.
[[nodiscard]] inline Matrix span_projector(const Matrix& basis) {
  Eigen::ColPivHouseholderQR<Matrix> qr(basis);
  if (qr.rank() < basis.cols()) {
    throw std::invalid_argument("span_projector: basis is rank deficient");
  }
  const Matrix gram = basis.transpose() * basis;
  return basis * gram.ldlt().solve(basis.transpose());
}

/// Maximum singular value of P_est - P_true, the projection distance between
/// the two column spans. Lies in [0, 1]; zero iff the spans coincide.
[[nodiscard]] inline double delta_m(const Matrix& estimated,
                                    const Matrix& truth) {
  if (estimated.rows() != truth.rows()) {
    throw std::invalid_argument("delta_m: bases live in different spaces");
  }
  const Matrix diff = span_projector(estimated) - span_projector(truth);
  // The difference of two orthogonal projectors is symmetric; its spectral
  // norm is the largest absolute eigenvalue.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym(diff));
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

struct SelectionRates {
  double tpr = 0.0;
  double fpr = 0.0;
};

/// True/false positive rates of an estimated active set against the truth,
/// over predictors 0..p-1. An empty true set is an error; an empty true
/// complement yields fpr = 0 (nothing can be falsely selected).
[[nodiscard]] inline SelectionRates tpr_fpr(const std::vector<int>& estimated,
                                            const std::vector<int>& truth,
                                            int p) {
  if (truth.empty()) {
    throw std::invalid_argument("tpr_fpr: true active set is empty");
  }
  std::vector<char> inTruth(p, 0), inEst(p, 0);
  for (int i : truth) {
    if (i < 0 || i >= p) throw std::invalid_argument("tpr_fpr: index range");
    inTruth[i] = 1;
  }
  for (int i : estimated) {
    if (i < 0 || i >= p) throw std::invalid_argument("tpr_fpr: index range");
    inEst[i] = 1;
  }
  int tp = 0, fp = 0, nTruth = 0;
  for (int i = 0; i < p; ++i) {
    nTruth += inTruth[i];
    if (inEst[i] && inTruth[i]) ++tp;
    if (inEst[i] && !inTruth[i]) ++fp;
  }
  SelectionRates rates;
  rates.tpr = static_cast<double>(tp) / nTruth;
  rates.fpr = (p - nTruth) > 0 ? static_cast<double>(fp) / (p - nTruth) : 0.0;
  return rates;
}

}  // namespace mmrn
