#include "mmrn/dcov.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

using mmrn::Matrix;
using mmrn::Vector;

Matrix random_gaussian(int rows, int cols, std::mt19937& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) M(i, j) = normal(gen);
  return M;
}

// Scalar-loop Euclidean distances, kept deliberately free of Eigen reductions.
Matrix pairwise_oracle(const Matrix& M) {
  const int n = static_cast<int>(M.rows());
  Matrix D(n, n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      double ss = 0.0;
      for (int j = 0; j < M.cols(); ++j) {
        const double diff = M(k, j) - M(l, j);
        ss += diff * diff;
      }
      D(k, l) = std::sqrt(ss);
    }
  }
  return D;
}

// Szekely's V-statistic from raw distances: S1 + S2 - 2 S3 with explicit
// scalar loops (the S3 term is the cubic-cost sum). Independent of any
// centering code in the library.
double szekely_oracle(const Matrix& a, const Matrix& b) {
  const int n = static_cast<int>(a.rows());
  double s1 = 0.0, sa = 0.0, sb = 0.0, s3 = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      s1 += a(k, l) * b(k, l);
      sa += a(k, l);
      sb += b(k, l);
    }
  }
  for (int k = 0; k < n; ++k) {
    double ra = 0.0, rb = 0.0;
    for (int l = 0; l < n; ++l) {
      ra += a(k, l);
      rb += b(k, l);
    }
    s3 += ra * rb;
  }
  const double n2 = static_cast<double>(n) * n;
  return s1 / n2 + (sa / n2) * (sb / n2) - 2.0 * s3 / (n2 * n);
}

TEST(SampleSet, ValidatesShapesAndFiniteness) {
  EXPECT_NO_THROW(mmrn::SampleSet(Matrix::Zero(5, 3), Matrix::Zero(5, 1)));
  EXPECT_THROW(mmrn::SampleSet(Matrix::Zero(5, 3), Matrix::Zero(4, 1)),
               std::invalid_argument);
  EXPECT_THROW(mmrn::SampleSet(Matrix::Zero(1, 3), Matrix::Zero(1, 1)),
               std::invalid_argument);
  Matrix bad = Matrix::Zero(5, 3);
  bad(2, 1) = std::nan("");
  EXPECT_THROW(mmrn::SampleSet(bad, Matrix::Zero(5, 1)),
               std::invalid_argument);
}

TEST(PairwiseDistances, MatchesScalarOracle) {
  std::mt19937 gen(101);
  const Matrix M = random_gaussian(3, 20, gen);
  const Matrix D = mmrn::pairwise_distances(M);
  EXPECT_LT((D - pairwise_oracle(M)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(D.diagonal().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((D - D.transpose()).cwiseAbs().maxCoeff(), 0.0);

  Matrix pair(2, 1);
  pair << 1.0, -2.5;
  const Matrix Dp = mmrn::pairwise_distances(pair);
  EXPECT_DOUBLE_EQ(Dp(0, 1), 3.5);

  Matrix bad = M;
  bad(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(mmrn::pairwise_distances(bad), std::invalid_argument);
}

TEST(DoubleCenter, TwoSampleHandValueAndZeroSums) {
  const double c = 3.5;
  Matrix b(2, 2);
  b << 0.0, c, c, 0.0;
  const auto kern = mmrn::double_center(b);
  Matrix ref(2, 2);
  ref << -c / 2, c / 2, c / 2, -c / 2;
  EXPECT_LT((kern.B - ref).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_DOUBLE_EQ(kern.grandMean, c / 2);
  EXPECT_DOUBLE_EQ(kern.rowMeans(0), c / 2);

  std::mt19937 gen(103);
  const Matrix Y = random_gaussian(17, 2, gen);
  const auto K = mmrn::double_center(mmrn::pairwise_distances(Y));
  EXPECT_LT(K.B.rowwise().sum().cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(K.B.colwise().sum().cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((K.B - K.B.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DcovSq, TwoEquivalentFormsAgree) {
  std::mt19937 gen(107);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 4 + static_cast<int>(gen() % 47);
    const int p = 1 + static_cast<int>(gen() % 10);
    const int q = 1 + static_cast<int>(gen() % 3);
    const Matrix X = random_gaussian(n, p, gen);
    const Matrix Y = random_gaussian(n, q, gen);
    const Matrix a = mmrn::pairwise_distances(X);
    const Matrix A = mmrn::double_center(a).B;
    const Matrix B = mmrn::double_center(mmrn::pairwise_distances(Y)).B;
    const double both = mmrn::dcov_sq_centered_both(A, B);
    const double single = mmrn::dcov_sq_single_centered(a, B);
    ASSERT_GT(std::abs(both), 0.0);
    EXPECT_LT(std::abs(both - single) / std::abs(both), 1e-10);
    // The V-statistic is nonnegative by construction.
    EXPECT_GT(both, -1e-14);
  }
}

TEST(DcovSq, MatchesSzekelyBruteForceOracle) {
  std::mt19937 gen(109);
  for (int n : {4, 7, 12}) {
    for (int rep = 0; rep < 10; ++rep) {
      const Matrix X = random_gaussian(n, 3, gen);
      const Matrix Y = random_gaussian(n, 1, gen);
      const Matrix a = mmrn::pairwise_distances(X);
      const Matrix b = mmrn::pairwise_distances(Y);
      const double oracle = szekely_oracle(a, b);
      const double val =
          mmrn::dcov_sq_single_centered(a, mmrn::double_center(b).B);
      EXPECT_NEAR(val, oracle, 1e-12 * std::max(1.0, std::abs(oracle)));
      EXPECT_NEAR(mmrn::dcov_sq(X, Y), oracle,
                  1e-12 * std::max(1.0, std::abs(oracle)));
    }
  }
}

TEST(DcovSq, SignSplitDecompositionRecoversTotal) {
  std::mt19937 gen(113);
  const int n = 23;
  const Matrix X = random_gaussian(n, 4, gen);
  const Matrix Y = random_gaussian(n, 1, gen);
  const Matrix a = mmrn::pairwise_distances(X);
  const Matrix B = mmrn::double_center(mmrn::pairwise_distances(Y)).B;
  double pos = 0.0, neg = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      if (B(k, l) > 0.0) pos += a(k, l) * B(k, l);
      if (B(k, l) < 0.0) neg += a(k, l) * (-B(k, l));
    }
  }
  const double total = (pos - neg) / (static_cast<double>(n) * n);
  EXPECT_NEAR(total, mmrn::dcov_sq_single_centered(a, B), 1e-12);
}

TEST(DcovSq, PermutationAndRotationInvariance) {
  std::mt19937 gen(127);
  const int n = 19;
  const Matrix X = random_gaussian(n, 5, gen);
  const Matrix Y = random_gaussian(n, 2, gen);
  const double base = mmrn::dcov_sq(X, Y);

  // Same row permutation applied to both samples.
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + n, gen);
  EXPECT_NEAR(mmrn::dcov_sq(perm * X, perm * Y), base, 1e-12);

  // Orthogonal rotation of the response leaves distances unchanged.
  const Matrix G = random_gaussian(2, 2, gen);
  const Matrix O = Eigen::HouseholderQR<Matrix>(G).householderQ();
  EXPECT_NEAR(mmrn::dcov_sq(X, Y * O), base, 1e-12);
}

TEST(DcovSq, ScalesLinearlyInPredictorDistances) {
  std::mt19937 gen(131);
  const Matrix X = random_gaussian(15, 3, gen);
  const Matrix Y = random_gaussian(15, 1, gen);
  const Matrix a = mmrn::pairwise_distances(X);
  const Matrix B = mmrn::double_center(mmrn::pairwise_distances(Y)).B;
  const double v = mmrn::dcov_sq_single_centered(a, B);
  EXPECT_NEAR(mmrn::dcov_sq_single_centered(Matrix(2.0 * a), B), 2.0 * v,
              1e-12);
}

TEST(PerturbedDcov, GapIsNonnegativeBoundedAndShrinksWithEps) {
  std::mt19937 gen(137);
  const int n = 40, p = 6, d = 2;
  const Matrix Z = random_gaussian(n, p, gen);
  // Dependent response so the transformed statistic has real signal.
  const Matrix Y = Z.col(0) + 0.5 * Z.col(1).cwiseProduct(Z.col(1));
  const Matrix B = mmrn::double_center(mmrn::pairwise_distances(Y)).B;
  Matrix gamma = Matrix::Zero(p, d);
  gamma(0, 0) = 1.0;
  gamma(1, 1) = 1.0;

  const Matrix a = mmrn::pairwise_distances(Z * gamma);
  const double exact = mmrn::perturbed_dcov(gamma, Z, B, 0.0);
  EXPECT_DOUBLE_EQ(exact, mmrn::dcov_sq_single_centered(a, B));

  double prevGap = std::numeric_limits<double>::infinity();
  for (double eps : {1.0, 0.1, 0.01}) {
    const double gap = exact - mmrn::perturbed_dcov(gamma, Z, B, eps);
    EXPECT_GE(gap, 0.0);
    EXPECT_LT(gap, prevGap);  // strictly decreasing as eps drops
    prevGap = gap;

    // Uniform bound: the projected distance never exceeds the full whitened
    // distance, and each term is controlled by eps log(1 + |Z_k - Z_l|/eps)
    // times the kernel magnitude.
    const Matrix full = mmrn::pairwise_distances(Z);
    double bound = 0.0;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        bound += eps * std::log1p(full(k, l) / eps) * std::abs(B(k, l));
    bound /= static_cast<double>(n) * n;
    EXPECT_LE(gap, bound + 1e-15);
  }

  EXPECT_THROW(static_cast<void>(mmrn::perturbed_dcov(gamma, Z, B, -1.0)),
               std::invalid_argument);
}

}  // namespace
