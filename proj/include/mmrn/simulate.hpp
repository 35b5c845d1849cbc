#pragma once
// Synthetic data generators for the benchmark scenarios: three regression
// models with interchangeable predictor families, four higher-dimensional
// selection studies over an AR(1) design, and a 20-dimensional circle whose
// two-dimensional structure a reduction method should recover.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mmrn/dcov.hpp"
#include "mmrn/rng.hpp"

namespace mmrn {

enum class Family {
  kModelA,
  kModelB,
  kModelC,
  kToyCircle,
  kStudy1,
  kStudy2,
  kStudy3,
  kStudy4,
};

/// Predictor family for the three regression models.
enum class Part { kNormal = 1, kNonnormal = 2, kDiscrete = 3 };

struct ScenarioSpec {
  Family family = Family::kModelA;
  Part part = Part::kNormal;  // meaningful for Models A-C only
  int n = 100;
  int p = 6;
  std::uint64_t seed = 0;

  void validate() const {
    const bool isModel = family == Family::kModelA ||
                         family == Family::kModelB ||
                         family == Family::kModelC;
    if (isModel) {
      if (p < 6) {
        throw std::invalid_argument(
            "scenario: models need p >= 6 (true directions live in the "
            "first six coordinates)");
      }
      if (n < 2) throw std::invalid_argument("scenario: need n >= 2");
      return;
    }
    if (part != Part::kNormal) {
      throw std::invalid_argument(
          "scenario: predictor parts apply to Models A-C only");
    }
    if (family == Family::kToyCircle) {
      if (p != 20) throw std::invalid_argument("scenario: toy circle has p = 20");
      if (n < 2) throw std::invalid_argument("scenario: need n >= 2");
      return;
    }
    if (p != 24) throw std::invalid_argument("scenario: studies have p = 24");
    if (n < 10) throw std::invalid_argument("scenario: studies need n >= 10");
  }
};

struct GroundTruth {
  Matrix betaTrue;             // p x d basis of the true subspace
  std::vector<int> activeSet;  // rows of betaTrue with any nonzero entry

  [[nodiscard]] int d() const { return static_cast<int>(betaTrue.cols()); }
};

struct GeneratedData {
  SampleSet data;
  GroundTruth truth;
};

// ===== Building blocks =====

/// Symmetric square root of the AR(1) covariance rho^|i-j|.
[[nodiscard]] inline Matrix ar1_sqrt(int p, double rho) {
  Matrix S(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) S(i, j) = std::pow(rho, std::abs(i - j));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  return eig.operatorSqrt();
}

namespace detail {

[[nodiscard]] inline Matrix gaussian_matrix(int n, int p, Rng& rng) {
  Matrix M(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) M(i, j) = rng.normal();
  return M;
}

/// Rows with a nonzero entry, in order.
[[nodiscard]] inline std::vector<int> nonzero_rows(const Matrix& beta) {
  std::vector<int> active;
  for (Eigen::Index i = 0; i < beta.rows(); ++i) {
    if (beta.row(i).cwiseAbs().maxCoeff() > 0.0) {
      active.push_back(static_cast<int>(i));
    }
  }
  return active;
}

[[nodiscard]] inline Matrix model_predictors(Family family, Part part, int n,
                                             int p, Rng& rng) {
  Matrix X(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      double x = 0.0;
      switch (part) {
        case Part::kNormal:
          x = rng.normal();
          break;
        case Part::kNonnormal:
          if (family == Family::kModelA) {
            x = 5.0 * rng.beta_a1(0.75) - 2.0;  // (x+2)/5 ~ Beta(0.75, 1)
          } else if (family == Family::kModelB) {
            x = rng.uniform(-2.0, 2.0);
          } else {
            x = 2.0 * rng.beta_a1(1.5) - 1.0;  // (x+1)/2 ~ Beta(1.5, 1)
          }
          break;
        case Part::kDiscrete:
          if (family == Family::kModelA) {
            x = static_cast<double>(rng.poisson(1.0));
          } else if (family == Family::kModelB) {
            x = static_cast<double>(rng.binomial(10, 0.1));
          } else {
            // Mixed: coordinate 6 is Binomial(10, 0.3), the rest Poisson(1).
            x = (j == 5) ? static_cast<double>(rng.binomial(10, 0.3))
                         : static_cast<double>(rng.poisson(1.0));
          }
          break;
      }
      X(i, j) = x;
    }
  }
  return X;
}

}  // namespace detail

/// Draw one scenario. Deterministic in spec.seed: the predictor and noise
/// streams are fixed substreams, so identical specs regenerate bit for bit.
[[nodiscard]] inline GeneratedData generate(const ScenarioSpec& spec) {
  spec.validate();
  Rng xRng = Rng::substream(spec.seed, 0);
  Rng eRng = Rng::substream(spec.seed, 1);
  const int n = spec.n;
  const int p = spec.p;

  const auto padded = [p](std::initializer_list<double> head) {
    Vector b = Vector::Zero(p);
    int i = 0;
    for (double v : head) b(i++) = v;
    return b;
  };

  switch (spec.family) {
    case Family::kModelA: {
      const Matrix X =
          detail::model_predictors(spec.family, spec.part, n, p, xRng);
      const Vector b1 = padded({1, 0, 0, 0, 0, 0});
      const Vector b2 = padded({0, 1, 0, 0, 0, 0});
      Matrix Y(n, 1);
      for (int i = 0; i < n; ++i) {
        const double t1 = X.row(i).dot(b1);
        const double t2 = X.row(i).dot(b2);
        Y(i, 0) = t1 * t1 + t2 + 0.1 * eRng.normal();
      }
      Matrix beta(p, 2);
      beta.col(0) = b1;
      beta.col(1) = b2;
      return {SampleSet(X, Y), {beta, detail::nonzero_rows(beta)}};
    }
    case Family::kModelB: {
      const Matrix X =
          detail::model_predictors(spec.family, spec.part, n, p, xRng);
      const Vector b1 = padded({1, 0, 0, 0, 0, 0});
      const Vector b2 = padded({0, 1, 0, 0, 0, 0});
      Matrix Y(n, 1);
      for (int i = 0; i < n; ++i) {
        const double e1 = eRng.normal();
        const double e2 = eRng.normal();
        const double s = 2.0 * X.row(i).dot(b1) + e1;
        const double sgn = (s > 0.0) - (s < 0.0);
        Y(i, 0) = sgn * std::log(std::abs(2.0 * X.row(i).dot(b2) + 4.0 + e2));
      }
      Matrix beta(p, 2);
      beta.col(0) = b1;
      beta.col(1) = b2;
      return {SampleSet(X, Y), {beta, detail::nonzero_rows(beta)}};
    }
    case Family::kModelC: {
      const Matrix X =
          detail::model_predictors(spec.family, spec.part, n, p, xRng);
      const Vector b3 = padded({1, 0.5, 1, 0, 0, 0});
      Matrix Y(n, 1);
      for (int i = 0; i < n; ++i) {
        Y(i, 0) = std::exp(X.row(i).dot(b3)) * eRng.normal();
      }
      Matrix beta(p, 1);
      beta.col(0) = b3;
      return {SampleSet(X, Y), {beta, detail::nonzero_rows(beta)}};
    }
    case Family::kToyCircle: {
      Matrix Gamma(20, 2);
      for (int i = 0; i < 20; ++i) {
        Gamma(i, 0) = 1.0;
        Gamma(i, 1) = (i % 2 == 0) ? 1.0 : -1.0;
      }
      const Matrix phiHalf = ar1_sqrt(20, 0.5);
      Matrix X(n, 20), Y(n, 1);
      for (int i = 0; i < n; ++i) {
        const double y = xRng.uniform();
        Y(i, 0) = y;
        Vector noise(20);
        for (int j = 0; j < 20; ++j) noise(j) = eRng.normal();
        Vector circle(2);
        circle << std::cos(2.0 * M_PI * y), std::sin(2.0 * M_PI * y);
        X.row(i) = (Gamma * circle + 0.1 * phiHalf * noise).transpose();
      }
      return {SampleSet(X, Y), {Gamma, detail::nonzero_rows(Gamma)}};
    }
    case Family::kStudy1: {
      const Matrix X =
          detail::gaussian_matrix(n, p, xRng) * ar1_sqrt(p, 0.5);
      const Vector b1 = padded({0.5, 0.5, 0.5, 0.5});
      Matrix Y(n, 1);
      for (int i = 0; i < n; ++i) {
        const double t = X.row(i).dot(b1) + 0.5;
        Y(i, 0) = t * t + 0.5 * eRng.normal();
      }
      Matrix beta(p, 1);
      beta.col(0) = b1;
      return {SampleSet(X, Y), {beta, detail::nonzero_rows(beta)}};
    }
    case Family::kStudy2: {
      const Matrix X =
          detail::gaussian_matrix(n, p, xRng) * ar1_sqrt(p, 0.5);
      const Vector b1 = padded({1});
      const Vector b2 = padded({0, 1});
      Matrix Y(n, 1);
      for (int i = 0; i < n; ++i) {
        const double t2 = X.row(i).dot(b2) + 1.5;
        Y(i, 0) = X.row(i).dot(b1) / (0.5 + t2 * t2) + 0.2 * eRng.normal();
      }
      Matrix beta(p, 2);
      beta.col(0) = b1;
      beta.col(1) = b2;
      return {SampleSet(X, Y), {beta, detail::nonzero_rows(beta)}};
    }
    case Family::kStudy3: {
      // x_1 depends on x_2, x_3; the trailing 23 coordinates are AR(1).
      const Matrix tail =
          detail::gaussian_matrix(n, p - 1, xRng) * ar1_sqrt(p - 1, 0.5);
      Matrix X(n, p);
      X.rightCols(p - 1) = tail;
      for (int i = 0; i < n; ++i) {
        X(i, 0) = std::abs(tail(i, 0) + tail(i, 1)) + eRng.normal();
      }
      const Vector b1 = padded({0.5, 0.5, 0.5, 0.5});
      const Vector b2 = padded({0.5, -0.5, 0.5, -0.5});
      Matrix Y(n, 1);
      for (int i = 0; i < n; ++i) {
        const double t1 = X.row(i).dot(b1);
        Y(i, 0) = t1 * t1 + std::abs(X.row(i).dot(b2)) + 0.5 * eRng.normal();
      }
      Matrix beta(p, 2);
      beta.col(0) = b1;
      beta.col(1) = b2;
      return {SampleSet(X, Y), {beta, detail::nonzero_rows(beta)}};
    }
    case Family::kStudy4: {
      const Matrix X =
          detail::gaussian_matrix(n, p, xRng) * ar1_sqrt(p, 0.5);
      const Vector b1 = padded({0.5, 0.5, 0.5, 0.5});
      const Vector b2 = padded({0.5, -0.5, 0.5, -0.5});
      Matrix Y(n, 2);
      for (int i = 0; i < n; ++i) {
        Y(i, 0) = X.row(i).dot(b1) + eRng.normal();
        const double t2 = X.row(i).dot(b2) + 0.5;
        Y(i, 1) = t2 * t2 + eRng.normal();
      }
      Matrix beta(p, 2);
      beta.col(0) = b1;
      beta.col(1) = b2;
      return {SampleSet(X, Y), {beta, detail::nonzero_rows(beta)}};
    }
  }
  throw std::logic_error("scenario: unknown family");
}

}  // namespace mmrn
