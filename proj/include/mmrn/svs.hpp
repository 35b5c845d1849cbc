#pragma once
// Sufficient variable selection: a row-wise group penalty on beta turns the
// dimension-reduction fit into a predictor-selection method. The penalty is
// smoothed with the same eps device as the main objective, minorized by a
// diagonal curvature correction to Q, and tuned by an information criterion
// over a lambda path.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmrn/fit.hpp"

namespace mmrn {

// ===== Configuration and results =====

struct PenaltyConfig {
  double lambda = 0.0;
  Vector theta;             // per-row weights; empty means all ones
  bool adaptive = false;    // derive theta from an unpenalized pilot fit
  double weightFloor = 1e-6;  // guards 1/rho in the adaptiveweights
  double truncationTol = 1e-7;  // row norms at or below this are zeroed

  void validate() const {
    if (!(lambda >= 0.0)) {
      throw std::invalid_argument("penalty: lambda must be >= 0");
    }
    if (theta.size() > 0 && theta.minCoeff() < 0.0) {
      throw std::invalid_argument("penalty: theta must be elementwise >= 0");
    }
    if (!(truncationTol >= 0.0)) {
      throw std::invalid_argument("penalty: truncationTol must be >= 0");
    }
    if (!(weightFloor >= 0.0)) {
      throw std::invalid_argument("penalty: weightFloor must be >= 0");
    }
  }
};

struct SparseFitResult {
  FitResult fit;                // untouched optimizer output
  Matrix betaHat;               // truncated copy: sub-threshold rows zeroed
  std::vector<int> activeRows;  // { i : ||row i of fit.betaHat|| > tol }
  double lambdaUsed = 0.0;
  Vector theta;                 // resolved weights actually applied
  double bicValue = 0.0;
};

// ===== Penalty pieces =====

/// theta_i = 1 / (||row i of pilot beta|| + floorEps): rows the pilot finds
/// irrelevant are penalized heavily, established rows barely at all.
[[nodiscard]] inline Vector adaptive_weights(const Matrix& pilotBeta,
                                             double floorEps) {
  Vector theta(pilotBeta.rows());
  for (Eigen::Index i = 0; i < pilotBeta.rows(); ++i) {
    theta(i) = 1.0 / (pilotBeta.row(i).norm() + floorEps);
  }
  return theta;
}

[[nodiscard]] inline Vector adaptive_weights(const FitResult& pilot,
                                             double floorEps) {
  return adaptive_weights(pilot.betaHat, floorEps);
}

namespace detail {

/// Concrete weight vector for a given predictor count: empty -> ones.
[[nodiscard]] inline Vector resolve_theta(const PenaltyConfig& cfg, int p) {
  cfg.validate();
  if (cfg.theta.size() == 0) return Vector::Ones(p);
  if (cfg.theta.size() != p) {
    throw std::invalid_argument("penalty: theta must have length p");
  }
  return cfg.theta;
}

}  // namespace detail

/// Penalized objective: perturbed dcov minus the smoothed group penalty on
/// the rows of beta = sigmaInvHalf * gamma. lambda = 0 reduces it exactly to
/// the unpenalized perturbed objective.
[[nodiscard]] inline double penalized_objective(const Matrix& gamma,
                                                const Matrix& Z,
                                                const Matrix& B, double eps,
                                                const PenaltyConfig& cfg,
                                                const Matrix& sigmaInvHalf) {
  const Vector theta = detail::resolve_theta(cfg, static_cast<int>(gamma.rows()));
  double f = perturbed_dcov(gamma, Z, B, eps);
  if (cfg.lambda > 0.0) {
    f -= cfg.lambda * detail::penalty_value(sigmaInvHalf * gamma, theta, eps);
  }
  return f;
}

/// Surrogate for the penalized objective: the plain surrogate plus a diagonal
/// (in beta coordinates) negative-semidefinite curvature term on Q.
[[nodiscard]] inline Surrogate build_penalized_surrogate(
    const Matrix& gammaT, const Matrix& Z, const Matrix& B, double eps,
    const PenaltyConfig& cfg, const Matrix& sigmaInvHalf) {
  const Vector theta = detail::resolve_theta(cfg, static_cast<int>(gammaT.rows()));
  Surrogate s = build_surrogate(Z, B, gammaT, eps);
  if (cfg.lambda > 0.0 && theta.cwiseAbs().maxCoeff() > 0.0) {
    s.Q += detail::penalty_curvature(sigmaInvHalf, gammaT, cfg.lambda, theta,
                                     eps);
  }
  return s;
}

// ===== Sparse fitting =====

namespace detail {

/// Zero out sub-threshold rows and report the surviving indices.
inline void truncate_rows(const Matrix& beta, double tol, Matrix& truncated,
                          std::vector<int>& active) {
  truncated = beta;
  active.clear();
  for (Eigen::Index i = 0; i < beta.rows(); ++i) {
    if (beta.row(i).norm() > tol) {
      active.push_back(static_cast<int>(i));
    } else {
      truncated.row(i).setZero();
    }
  }
}

/// Information criterion: reward dcov fit at the truncated estimate, charge
/// log(n) per active row per direction.
[[nodiscard]] inline double bic_value(const SampleSet& data,
                                      const Matrix& betaTruncated, int d,
                                      int activeCount) {
  const double v = dcov_sq(data.X * betaTruncated, data.Y);
  const double n = static_cast<double>(data.n());
  return -n * std::log(v + 1e-12) + std::log(n) * d * activeCount;
}

[[nodiscard]] inline SparseFitResult finish_sparse(const SampleSet& data,
                                                   FitResult&& fit, int d,
                                                   double lambda,
                                                   const Vector& theta,
                                                   double truncationTol) {
  SparseFitResult out;
  out.fit = std::move(fit);
  detail::truncate_rows(out.fit.betaHat, truncationTol, out.betaHat,
                        out.activeRows);
  out.lambdaUsed = lambda;
  out.theta = theta;
  out.bicValue = detail::bic_value(data, out.betaHat, d,
                                   static_cast<int>(out.activeRows.size()));
  return out;
}

}  // namespace detail

/// Penalized fit. With adaptive weights requested and no explicit theta, an
/// unpenalized pilot run supplies them. lambda = 0 (or all-zero theta)
/// reproduces fit_sdr exactly -- same code path, bit for bit.
[[nodiscard]] inline SparseFitResult fit_svs(const SampleSet& data, int d,
                                             const PenaltyConfig& cfg,
                                             const FitOptions& opts = {}) {
  cfg.validate();
  const auto w = whiten(data);
  const auto kern = double_center(pairwise_distances(data.Y));

  Vector theta;
  if (cfg.adaptive && cfg.theta.size() == 0) {
    const FitResult pilot = fit_core(data, w, kern, d, opts, PenaltySpec{});
    theta = adaptive_weights(pilot.betaHat, cfg.weightFloor);
  } else {
    theta = detail::resolve_theta(cfg, data.p());
  }

  FitResult fit =
      fit_core(data, w, kern, d, opts, PenaltySpec{cfg.lambda, theta});
  return detail::finish_sparse(data, std::move(fit), d, cfg.lambda, theta,
                               cfg.truncationTol);
}

// ===== Tuning path =====

/// 20 logarithmically spaced lambdas spanning [1e-4, 1] times a data-driven
/// scale (mean absolute centered response distance per sample), so the path
/// brackets both the no-shrinkage and the total-shrinkage regimes.
[[nodiscard]] inline std::vector<double> default_lambda_grid(
    const SampleSet& data, int count = 20) {
  if (count < 1) {
    throw std::invalid_argument("lambda grid: count must be >= 1");
  }
  const auto kern = double_center(pairwise_distances(data.Y));
  const double scale =
      kern.B.cwiseAbs().sum() / static_cast<double>(data.n());
  std::vector<double> grid(count);
  if (count == 1 || scale <= 0.0) {
    std::fill(grid.begin(), grid.end(), scale);
    return grid;
  }
  const double lo = std::log(1e-4 * scale);
  const double hi = std::log(scale);
  for (int i = 0; i < count; ++i) {
    grid[i] = std::exp(lo + (hi - lo) * i / double(count - 1));
  }
  return grid;
}

struct BicPathEntry {
  double lambda = 0.0;
  double bic = std::numeric_limits<double>::infinity();
  std::vector<int> activeRows;
  double dcov = 0.0;   // unperturbed dcov at the truncated estimate
  bool converged = false;
  bool failed = false;  // fit threw; entry excluded from selection
};

struct BicSelection {
  double bestLambda = 0.0;
  SparseFitResult best;
  std::vector<BicPathEntry> path;  // ascending lambda order
};

/// Fit the whole lambda path (warm-started, ascending) and pick the entry
/// with the smallest criterion value; ties go to the larger lambda.
[[nodiscard]] inline BicSelection bic_select(const SampleSet& data, int d,
                                             std::vector<double> lambdaGrid,
                                             const PenaltyConfig& cfg = {},
                                             const FitOptions& opts = {}) {
  cfg.validate();
  if (lambdaGrid.empty()) {
    throw std::invalid_argument("bic_select: lambda grid must be nonempty");
  }
  for (double l : lambdaGrid) {
    if (!(l >= 0.0)) {
      throw std::invalid_argument("bic_select: lambdas must be >= 0");
    }
  }
  std::sort(lambdaGrid.begin(), lambdaGrid.end());

  const auto w = whiten(data);
  const auto kern = double_center(pairwise_distances(data.Y));

  // Weights are resolved once so every path entry is penalized consistently.
  Vector theta;
  if (cfg.adaptive && cfg.theta.size() == 0) {
    const FitResult pilot = fit_core(data, w, kern, d, opts, PenaltySpec{});
    theta = adaptive_weights(pilot.betaHat, cfg.weightFloor);
  } else {
    theta = detail::resolve_theta(cfg, data.p());
  }

  BicSelection sel;
  bool haveBest = false;
  FitOptions cur = opts;
  std::string lastError = "no fits attempted";
  for (double lambda : lambdaGrid) {
    BicPathEntry entry;
    entry.lambda = lambda;
    try {
      FitResult fit =
          fit_core(data, w, kern, d, cur, PenaltySpec{lambda, theta});
      // Warm-start the next, larger lambda from this solution.
      cur.init = FitOptions::Init::kUser;
      cur.userInit = fit.gammaHat;

      SparseFitResult sparse = detail::finish_sparse(
          data, std::move(fit), d, lambda, theta, cfg.truncationTol);
      entry.bic = sparse.bicValue;
      entry.activeRows = sparse.activeRows;
      entry.dcov = dcov_sq(data.X * sparse.betaHat, data.Y);
      entry.converged = sparse.fit.converged;
      if (!haveBest || entry.bic <= sel.best.bicValue) {
        sel.best = std::move(sparse);
        sel.bestLambda = lambda;
        haveBest = true;
      }
    } catch (const std::exception& e) {
      entry.failed = true;
      lastError = e.what();
    }
    sel.path.push_back(std::move(entry));
  }
  if (!haveBest) {
    throw std::runtime_error("bic_select: every fit on the grid failed: " +
                             lastError);
  }
  return sel;
}

}  // namespace mmrn
