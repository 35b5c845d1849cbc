#include "mmrn/stiefel.hpp"

#include <gtest/gtest.h>

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

mmrn::StiefelPoint random_stiefel(int p, int d, std::mt19937& gen) {
  const Matrix M = random_gaussian(p, d, gen);
  Eigen::HouseholderQR<Matrix> qr(M);
  Matrix Q = qr.householderQ() * Matrix::Identity(p, d);
  const Matrix R = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return mmrn::StiefelPoint(std::move(Q));
}

// veck computed by explicit index arithmetic, independent of the library's
// loop, to pin the strict-lower-triangle column-major ordering.
Vector veck_oracle(const Matrix& U) {
  const int d = static_cast<int>(U.rows());
  Vector out(d * (d - 1) / 2);
  int k = 0;
  for (int j = 0; j < d; ++j)
    for (int i = j + 1; i < d; ++i) out(k++) = U(i, j);
  return out;
}

TEST(SymSkew, DecomposesAndMatchesHandValues) {
  Matrix W(2, 2);
  W << 1.0, 2.0, 3.0, 4.0;
  const Matrix S = mmrn::sym(W);
  const Matrix K = mmrn::skew(W);
  Matrix Sref(2, 2);
  Sref << 1.0, 2.5, 2.5, 4.0;
  Matrix Kref(2, 2);
  Kref << 0.0, -0.5, 0.5, 0.0;
  EXPECT_EQ(S, Sref);
  EXPECT_EQ(K, Kref);
  EXPECT_EQ(Matrix(S + K), W);

  std::mt19937 gen(7);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix M = random_gaussian(5, 5, gen);
    EXPECT_LT((mmrn::sym(M) + mmrn::skew(M) - M).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((mmrn::sym(M) - mmrn::sym(M).transpose()).cwiseAbs().maxCoeff(),
              1e-15);
    EXPECT_LT((mmrn::skew(M) + mmrn::skew(M).transpose()).cwiseAbs().maxCoeff(),
              1e-15);
  }
}

TEST(StiefelPoint, ValidatesOrthonormality) {
  EXPECT_NO_THROW(mmrn::StiefelPoint(Matrix::Identity(4, 2)));
  Matrix bad = Matrix::Identity(4, 2);
  bad(0, 0) = 1.5;
  EXPECT_THROW(mmrn::StiefelPoint{bad}, std::invalid_argument);
  // p < d is rejected outright.
  EXPECT_THROW(mmrn::StiefelPoint{Matrix::Identity(2, 3)},
               std::invalid_argument);
}

TEST(TangentProject, MatchesHandExampleAndIsIdempotent) {
  // p = 2, d = 1, gamma = e1: projection zeroes the first coordinate.
  mmrn::StiefelPoint gamma(Matrix::Identity(2, 1));
  Matrix W(2, 1);
  W << 3.0, -2.0;
  const Matrix xi = mmrn::tangent_project(gamma, W);
  EXPECT_DOUBLE_EQ(xi(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(xi(1, 0), -2.0);

  std::mt19937 gen(11);
  for (auto [p, d] : {std::pair{4, 1}, {6, 2}, {9, 3}, {5, 5}}) {
    const auto G = random_stiefel(p, d, gen);
    const Matrix A = random_gaussian(p, d, gen);
    const Matrix P1 = mmrn::tangent_project(G, A);
    const Matrix P2 = mmrn::tangent_project(G, P1);
    EXPECT_LT((P1 - P2).cwiseAbs().maxCoeff(), 1e-13);
    // gamma' xi is skew-symmetric for tangent xi.
    const Matrix GtXi = G.matrix().transpose() * P1;
    EXPECT_LT((GtXi + GtXi.transpose()).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(QrRetract, OrthonormalAndFirstOrderAccurate) {
  std::mt19937 gen(13);
  for (auto [p, d] : {std::pair{5, 1}, {8, 3}, {12, 4}}) {
    const auto G = random_stiefel(p, d, gen);
    const Matrix xi =
        mmrn::tangent_project(G, random_gaussian(p, d, gen));
    const auto R1 = mmrn::qr_retract(G, xi);
    const Matrix gram =
        R1.matrix().transpose() * R1.matrix() - Matrix::Identity(d, d);
    EXPECT_LT(gram.cwiseAbs().maxCoeff(), 1e-12);

    // Retr(t xi) = gamma + t xi + O(t^2): halving t must quarter the error.
    const double t1 = 1e-3, t2 = 5e-4;
    const double e1 =
        (mmrn::qr_retract(G, t1 * xi).matrix() - (G.matrix() + t1 * xi))
            .norm();
    const double e2 =
        (mmrn::qr_retract(G, t2 * xi).matrix() - (G.matrix() + t2 * xi))
            .norm();
    EXPECT_LT(e1, 1e-4);
    EXPECT_LT(e2, 0.3 * e1);
  }
}

TEST(QrRetract, ZeroStepIsBitForBitBase) {
  std::mt19937 gen(17);
  const auto G = random_stiefel(7, 3, gen);
  const auto R = mmrn::qr_retract(G, Matrix::Zero(7, 3));
  EXPECT_EQ(R.matrix(), G.matrix());
}

TEST(QrRetract, PositiveDiagonalSignConvention) {
  std::mt19937 gen(19);
  const auto G = random_stiefel(6, 2, gen);
  const Matrix xi = mmrn::tangent_project(G, random_gaussian(6, 2, gen));
  const auto Q = mmrn::qr_retract(G, xi);
  // R = Q'(gamma + xi) must be upper triangular with positive diagonal.
  const Matrix R = Q.matrix().transpose() * (G.matrix() + xi);
  for (int j = 0; j < 2; ++j) {
    EXPECT_GT(R(j, j), 0.0);
    for (int i = j + 1; i < 2; ++i) EXPECT_NEAR(R(i, j), 0.0, 1e-12);
  }
}

TEST(QrRetract, RankDeficientSumThrows) {
  mmrn::StiefelPoint gamma(Matrix::Identity(2, 1));
  // xi = -gamma is not tangent and collapses gamma + xi to zero.
  EXPECT_THROW(mmrn::qr_retract(gamma, Matrix(-gamma.matrix())),
               std::runtime_error);
}

TEST(OrthComplement, CompletesToOrthogonalBasisDeterministically) {
  std::mt19937 gen(23);
  for (auto [p, d] : {std::pair{2, 1}, {6, 2}, {10, 3}}) {
    const auto G = random_stiefel(p, d, gen);
    const Matrix P = mmrn::orth_complement(G);
    ASSERT_EQ(P.rows(), p);
    ASSERT_EQ(P.cols(), p - d);
    Matrix full(p, p);
    full << G.matrix(), P;
    EXPECT_LT((full.transpose() * full - Matrix::Identity(p, p))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
    const Matrix P2 = mmrn::orth_complement(G);
    EXPECT_EQ(P, P2);  // deterministic, including signs
  }
}

TEST(OrthComplement, HandExampleInTwoDimensions) {
  mmrn::StiefelPoint gamma(Matrix::Identity(2, 1));
  const Matrix P = mmrn::orth_complement(gamma);
  ASSERT_EQ(P.rows(), 2);
  ASSERT_EQ(P.cols(), 1);
  EXPECT_NEAR(std::abs(P(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(P(0, 0), 0.0, 1e-15);
  EXPECT_GT(P(1, 0), 0.0);  // sign fixed by the largest-entry convention
}

TEST(TangentVector, CoordinatesRoundTripThroughAmbient) {
  std::mt19937 gen(29);
  for (auto [p, d] : {std::pair{5, 1}, {7, 2}, {9, 4}}) {
    const auto G = random_stiefel(p, d, gen);
    const Matrix P = mmrn::orth_complement(G);
    const Matrix U = mmrn::skew(random_gaussian(d, d, gen));
    const Matrix V = random_gaussian(p - d, d, gen);
    const mmrn::TangentVector xi(U, V, G.matrix(), P);
    const auto back = mmrn::to_coordinates(G, P, xi.ambient());
    EXPECT_LT((back.U - U).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((back.V - V).cwiseAbs().maxCoeff(), 1e-13);
    // Norm in coordinates equals the ambient Frobenius norm.
    EXPECT_NEAR(xi.norm(), xi.ambient().norm(), 1e-12);
    // For general W, to_coordinates realizes the tangent projection.
    const Matrix W = random_gaussian(p, d, gen);
    EXPECT_LT((mmrn::to_coordinates(G, P, W).ambient() -
               mmrn::tangent_project(G, W))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
}

TEST(TangentVector, RejectsNonSkewU) {
  std::mt19937 gen(31);
  const auto G = random_stiefel(5, 2, gen);
  const Matrix P = mmrn::orth_complement(G);
  Matrix U = Matrix::Zero(2, 2);
  U(0, 1) = 0.3;  // not skew: missing the mirrored negative entry
  EXPECT_THROW(mmrn::TangentVector(U, Matrix::Zero(3, 2), G.matrix(), P),
               std::invalid_argument);
}

TEST(OperatorPack, PinnedLiteralsForSmallDimensions) {
  const auto p2 = mmrn::build_operator_pack(2);
  Vector d2ref(4);
  d2ref << 0.0, 1.0, -1.0, 0.0;
  ASSERT_EQ(p2.Dd.rows(), 4);
  ASSERT_EQ(p2.Dd.cols(), 1);
  EXPECT_EQ(Vector(p2.Dd.col(0)), d2ref);

  Matrix t2ref(4, 4);
  t2ref << 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1;
  EXPECT_EQ(p2.Td, t2ref);

  // d = 3: columns ordered (2,1), (3,1), (3,2); vec index r = d(j-1)+i.
  const auto p3 = mmrn::build_operator_pack(3);
  Matrix d3ref = Matrix::Zero(9, 3);
  d3ref(1, 0) = 1.0;
  d3ref(3, 0) = -1.0;
  d3ref(2, 1) = 1.0;
  d3ref(6, 1) = -1.0;
  d3ref(5, 2) = 1.0;
  d3ref(7, 2) = -1.0;
  EXPECT_EQ(p3.Dd, d3ref);

  // d = 1: empty veck block, trivial commutation.
  const auto p1 = mmrn::build_operator_pack(1);
  EXPECT_EQ(p1.Dd.rows(), 1);
  EXPECT_EQ(p1.Dd.cols(), 0);
  EXPECT_EQ(p1.Td, Matrix::Identity(1, 1));
}

TEST(OperatorPack, IdentitiesHoldExactly) {
  std::mt19937 gen(37);
  for (int d = 1; d <= 6; ++d) {
    const auto pack = mmrn::build_operator_pack(d);
    for (int rep = 0; rep < 50; ++rep) {
      const Matrix U = mmrn::skew(random_gaussian(d, d, gen));
      const Vector vk = mmrn::veck(U);
      // vec(U) = Dd veck(U) and veck(U) = Dd' vec(U) / 2, exactly.
      EXPECT_EQ(Vector(pack.Dd * vk), mmrn::vec(U));
      EXPECT_EQ(Vector(0.5 * pack.Dd.transpose() * mmrn::vec(U)), vk);
      EXPECT_EQ(vk, veck_oracle(U));
      EXPECT_EQ(mmrn::veck_inv(vk, d), U);

      const Matrix W = random_gaussian(d, d, gen);
      EXPECT_EQ(Vector(pack.Td * mmrn::vec(W)), mmrn::vec(Matrix(W.transpose())));
      EXPECT_EQ(Vector(0.5 * (Matrix::Identity(d * d, d * d) - pack.Td) *
                       mmrn::vec(W)),
                mmrn::vec(mmrn::skew(W)));
    }
    EXPECT_EQ(Matrix(pack.Td * pack.Td), Matrix::Identity(d * d, d * d));
  }
}

TEST(Veck, RejectsNonSkewAndBadLengths) {
  Matrix W(2, 2);
  W << 0.0, 1.0, 1.0, 0.0;  // symmetric, not skew
  EXPECT_THROW(mmrn::veck(W), std::invalid_argument);
  EXPECT_THROW(mmrn::veck_inv(Vector::Ones(2), 2), std::invalid_argument);
  EXPECT_NO_THROW(mmrn::veck_inv(Vector::Ones(1), 2));
}

}  // namespace
