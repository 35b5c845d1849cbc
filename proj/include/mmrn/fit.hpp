#pragma once

// Main optimization driver: maximize the perturbed distance-covariance
// objective (optionally minus a row-sparsity penalty) over the Stiefel
// manifold in whitened coordinates. Each outer iteration minorizes the
// objective by a quadratic surrogate, takes one inexact Riemannian Newton
// step on the surrogate, and safeguards it with an Armijo backtracking line
// search on the true objective. Monotone ascent of the objective trace is a
// structural guarantee of the scheme.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mmrn/dcov.hpp"
#include "mmrn/newton.hpp"
#include "mmrn/rng.hpp"
#include "mmrn/stiefel.hpp"
#include "mmrn/surrogate.hpp"
#include "mmrn/whiten.hpp"

namespace mmrn {

struct FitOptions {
  double eps = 1e-10;     // perturbation level of the smoothed objective
  double alpha = 1e-20;   // Armijo sufficient-increase constant
  double sigma = 0.5;     // backtracking step-halving factor
  double relTol = 1e-7;   // relative objective-change stopping rule
  int maxIter = 1000;
  int maxHalvings = 60;

  enum class Init { kSir, kRandom, kUser };
  Init init = Init::kSir;
  int sirSlices = 10;
  std::uint64_t seed = 0;  // seeds the random init and SIR fallback
  Matrix userInit;         // gamma0 in whitened coordinates, p x d

  bool center = true;
  RidgePolicy ridge = RidgePolicy::kAuto;
};

struct FitResult {
  Matrix betaHat;    // p x d estimate in original coordinates
  Matrix gammaHat;   // p x d estimate in whitened coordinates
  bool converged = false;
  int iterations = 0;
  std::vector<double> objectiveTrace;  // objective, initial value included
  std::vector<double> gradNorms;       // Riemannian gradient norm per iteration
  std::vector<int> lineSearchCounts;   // Armijo halvings per iteration
  int fallbackSteps = 0;   // steepest-ascent substitutions for Newton steps
  double ridge = 0.0;      // covariance ridge applied during whitening
  double finalObjective = 0.0;  // last (penalized, if applicable) objective
  double dcov = 0.0;       // unperturbed V^2_n of the fitted projection
  bool sirFallback = false;  // SIR init degenerated to a random start
};

// ===== Line search =====

struct ArmijoResult {
  StiefelPoint point;
  double objective = 0.0;
  int halvings = 0;
  bool success = false;
};

/// Backtracking line search along the tangent direction xi: tries step sizes
/// 1, sigma, sigma^2, ... and accepts the first candidate with
///   f(Retr(s xi)) >= f0 + alpha * s * ||xi||_F^2.
/// Exhausting maxHalvings returns success = false with the base point.
template <class Objective>
[[nodiscard]] ArmijoResult armijo_step(const StiefelPoint& gammaT,
                                       const TangentVector& xi, double f0,
                                       Objective&& objective, double alpha,
                                       double sigma, int maxHalvings) {
  if (!(sigma > 0.0 && sigma < 1.0)) {
    throw std::invalid_argument("armijo_step: sigma must lie in (0, 1)");
  }
  const double sq = xi.U.squaredNorm() + xi.V.squaredNorm();
  if (sq == 0.0) {
    return {gammaT, f0, 0, true};  // zero direction: stay put
  }
  const Matrix ambient = xi.ambient();
  double s = 1.0;
  for (int h = 0; h <= maxHalvings; ++h) {
    const StiefelPoint cand = qr_retract(gammaT, s * ambient);
    const double f = objective(cand.matrix());
    if (f >= f0 + alpha * s * sq) {
      return {cand, f, h, true};
    }
    s *= sigma;
  }
  return {gammaT, f0, maxHalvings, false};
}

// ===== Initialization =====

/// Haar-like random Stiefel point: Gaussian fill, thin QR, positive-diagonal
/// sign convention.
[[nodiscard]] inline StiefelPoint random_stiefel(int p, int d, Rng& rng) {
  Matrix M(p, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < p; ++i) M(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(M);
  Matrix Q = qr.householderQ() * Matrix::Identity(p, d);
  const Matrix R = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return StiefelPoint(std::move(Q));
}

struct SirInit {
  Matrix gamma0;          // p x d orthonormal initializer
  bool degenerate = false;  // response was constant; random start used
};

/// Sliced-inverse-regression initializer in whitened coordinates: leading d
/// eigenvectors of the between-slice covariance of Z, slicing the (first
/// coordinate of the) response into roughly equal groups. A constant
/// response degenerates to a seeded random start.
[[nodiscard]] inline SirInit sir_init(const Matrix& Z, const Matrix& Y, int d,
                                      int slices, std::uint64_t seed) {
  const int n = static_cast<int>(Z.rows());
  const int p = static_cast<int>(Z.cols());
  if (d < 1 || d > p) {
    throw std::invalid_argument("sir_init: need 1 <= d <= p");
  }
  if (slices < 2) {
    throw std::invalid_argument("sir_init: need at least 2 slices");
  }
  const Vector key = Y.col(0);
  const double spread = key.maxCoeff() - key.minCoeff();
  if (!(spread > 1e-12 * std::max(1.0, key.cwiseAbs().maxCoeff()))) {
    Rng rng(seed);
    return {random_stiefel(p, d, rng).matrix(), true};
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return key(a) < key(b); });

  const Matrix Zc = Z.rowwise() - Z.colwise().mean();
  const int nSlices = std::min(slices, n);
  Matrix M = Matrix::Zero(p, p);
  int start = 0;
  for (int h = 0; h < nSlices; ++h) {
    const int size = n / nSlices + (h < n % nSlices ? 1 : 0);
    Vector mean = Vector::Zero(p);
    for (int i = start; i < start + size; ++i) {
      mean += Zc.row(order[i]).transpose();
    }
    mean /= static_cast<double>(size);
    M += (static_cast<double>(size) / n) * mean * mean.transpose();
    start += size;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
  Matrix gamma0(p, d);
  for (int j = 0; j < d; ++j) {
    Vector v = eig.eigenvectors().col(p - 1 - j);  // descending eigenvalues
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0.0) v = -v;
    gamma0.col(j) = v;
  }
  return {std::move(gamma0), false};
}

// ===== Row-sparsity penalty pieces (shared with the sparse front end) =====

/// Optional adaptive group penalty on the rows of beta = sigmaInvHalf * gamma.
/// Empty theta or lambda = 0 disables it entirely, reproducing the plain fit
/// bit for bit.
struct PenaltySpec {
  double lambda = 0.0;
  Vector theta;  // p nonnegative row weights

  [[nodiscard]] bool active() const {
    return lambda > 0.0 && theta.size() > 0 && theta.cwiseAbs().maxCoeff() > 0.0;
  }
};

namespace detail {

/// Smoothed penalty value sum_i theta_i { rho_i - eps log(1 + rho_i/eps) },
/// rho_i the row norms of beta.
[[nodiscard]] inline double penalty_value(const Matrix& beta,
                                          const Vector& theta, double eps) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < beta.rows(); ++i) {
    const double rho = beta.row(i).norm();
    acc += theta(i) * (rho - eps * std::log1p(rho / eps));
  }
  return acc;
}

/// Quadratic minorization of the penalty at gammaT: adds
/// sigmaInvHalf diag(Lambda) sigmaInvHalf to Q with
/// Lambda_i = -lambda theta_i / (rho_i(gammaT) + eps).
[[nodiscard]] inline Matrix penalty_curvature(const Matrix& sigmaInvHalf,
                                              const Matrix& gammaT,
                                              double lambda,
                                              const Vector& theta, double eps) {
  const Matrix betaT = sigmaInvHalf * gammaT;
  Vector Lambda(betaT.rows());
  for (Eigen::Index i = 0; i < betaT.rows(); ++i) {
    Lambda(i) = -lambda * theta(i) / (betaT.row(i).norm() + eps);
  }
  return sigmaInvHalf * Lambda.asDiagonal() * sigmaInvHalf;
}

}  // namespace detail

// ===== Core driver =====

/// One full optimization run in whitened coordinates. `pen` may be inactive
/// (plain dimension reduction) or carry the row-sparsity penalty.
[[nodiscard]] inline FitResult fit_core(const SampleSet& data,
                                        const WhitenedData& w,
                                        const CenteredResponseKernel& kern,
                                        int d, const FitOptions& opts,
                                        const PenaltySpec& pen) {
  const int p = static_cast<int>(w.Z.cols());
  if (d < 1 || d > p) {
    throw std::invalid_argument("fit: need 1 <= d <= p");
  }
  if (data.n() < 4) {
    throw std::invalid_argument("fit: need at least 4 samples");
  }
  if (!(opts.eps > 0.0)) {
    throw std::invalid_argument("fit: eps must be positive");
  }
  if (pen.active() && pen.theta.size() != p) {
    throw std::invalid_argument("fit: penalty weights must have length p");
  }
  const Matrix& Z = w.Z;
  const Matrix& B = kern.B;
  const bool penalized = pen.active();

  const auto objective = [&](const Matrix& gamma) {
    double f = perturbed_dcov(gamma, Z, B, opts.eps);
    if (penalized) {
      f -= pen.lambda *
           detail::penalty_value(w.sigmaInvHalf * gamma, pen.theta, opts.eps);
    }
    return f;
  };

  FitResult res;
  res.ridge = w.ridge;

  StiefelPoint gamma = [&] {
    switch (opts.init) {
      case FitOptions::Init::kUser:
        if (opts.userInit.rows() != p || opts.userInit.cols() != d) {
          throw std::invalid_argument("fit: userInit must be p x d");
        }
        return StiefelPoint(opts.userInit);
      case FitOptions::Init::kRandom: {
        Rng rng(opts.seed);
        return random_stiefel(p, d, rng);
      }
      case FitOptions::Init::kSir:
      default: {
        auto init = sir_init(Z, data.Y, d, opts.sirSlices, opts.seed);
        res.sirFallback = init.degenerate;
        return StiefelPoint(std::move(init.gamma0));
      }
    }
  }();

  const OperatorPack pack = build_operator_pack(d);
  double f = objective(gamma.matrix());
  res.objectiveTrace.push_back(f);

  for (int t = 1; t <= opts.maxIter; ++t) {
    const Matrix dist = pairwise_distances(Z * gamma.matrix());
    Surrogate s =
        build_surrogate_from_dist(Z, B, gamma.matrix(), dist, opts.eps);
    if (penalized) {
      s.Q += detail::penalty_curvature(w.sigmaInvHalf, gamma.matrix(),
                                       pen.lambda, pen.theta, opts.eps);
    }
    const Matrix grad = riemannian_gradient(s, gamma.matrix());
    const double gradNorm = grad.norm();
    res.gradNorms.push_back(gradNorm);

    const Matrix perp = orth_complement(gamma);
    const NewtonSystem sys = build_newton_system(s, gamma, perp, pack);
    std::optional<TangentVector> xi = solve_newton(sys, gamma, perp);
    if (!xi.has_value()) {
      xi = solve_newton_min_norm(sys, gamma, perp);
    }

    // Ascent safeguard: fall back to the projected gradient when the Newton
    // direction is numerically orthogonal to or against the gradient.
    bool usingGradient = false;
    {
      const double ip = (grad.array() * xi->ambient().array()).sum();
      if (!(ip > 1e-14 * gradNorm * xi->norm())) {
        xi = to_coordinates(gamma, perp, grad);
        usingGradient = true;
        ++res.fallbackSteps;
      }
    }

    ArmijoResult step = armijo_step(gamma, *xi, f, objective, opts.alpha,
                                    opts.sigma, opts.maxHalvings);
    if (!step.success && !usingGradient) {
      xi = to_coordinates(gamma, perp, grad);
      ++res.fallbackSteps;
      step = armijo_step(gamma, *xi, f, objective, opts.alpha, opts.sigma,
                         opts.maxHalvings);
    }
    res.iterations = t;
    if (!step.success) {
      // Numerically stationary: no ascent along the gradient either.
      res.lineSearchCounts.push_back(step.halvings);
      res.objectiveTrace.push_back(f);
      res.converged =
          gradNorm <= std::max(1e-5, 1e-3 * res.gradNorms.front());
      break;
    }

    gamma = step.point;
    res.lineSearchCounts.push_back(step.halvings);
    res.objectiveTrace.push_back(step.objective);
    const double change = std::abs(step.objective - f);
    f = step.objective;
    if (change <= opts.relTol * std::max(std::abs(f), 1e-30)) {
      res.converged = true;
      break;
    }
  }

  res.gammaHat = gamma.matrix();
  res.betaHat = w.sigmaInvHalf * res.gammaHat;
  res.finalObjective = f;
  res.dcov = dcov_sq_single_centered(pairwise_distances(Z * res.gammaHat), B);
  return res;
}

/// Sufficient dimension reduction: fit a p x d basis whose projection of X
/// attains maximal (perturbed) distance covariance with Y.
[[nodiscard]] inline FitResult fit_sdr(const SampleSet& data, int d,
                                       const FitOptions& opts = {}) {
  const WhitenedData w = whiten(data, opts.center, opts.ridge);
  const CenteredResponseKernel kern =
      double_center(pairwise_distances(data.Y));
  return fit_core(data, w, kern, d, opts, PenaltySpec{});
}

}  // namespace mmrn
