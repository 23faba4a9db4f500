#include <gtest/gtest.h>

#include "cflow/numeric.hpp"
#include "support/matrix_suite.hpp"

using namespace cflow;

namespace {

Matrix diag(std::initializer_list<Complex> d) {
  Vector v(static_cast<Index>(d.size()));
  Index i = 0;
  for (Complex x : d) v(i++) = x;
  return v.asDiagonal();
}

Matrix swap2() {
  Matrix s(2, 2);
  s << 0.0, 1.0, 1.0, 0.0;
  return s;
}

}  // namespace

TEST(Multiply, IdentityIsNeutral) {
  std::mt19937_64 rng(1);
  const Matrix a = cflow::testing::random_complex(rng, 4, 4);
  EXPECT_EQ(max_norm(multiply(Matrix(Matrix::Identity(4, 4)), a) - a), 0.0);
}

TEST(Multiply, ShiftIsNilpotent) {
  const Matrix n = shift_matrix(2);
  EXPECT_EQ(max_norm(multiply(n, n)), 0.0);
}

TEST(Multiply, SwapIsAnInvolution) {
  EXPECT_EQ(max_norm(multiply(swap2(), swap2()) - Matrix::Identity(2, 2)), 0.0);
}

TEST(Multiply, RejectsMismatchedShapes) {
  try {
    multiply(Matrix(Matrix::Zero(2, 3)), Matrix(Matrix::Zero(2, 3)));
    FAIL() << "expected DimensionMismatch";
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(LuFactor, IdentityHasUnitPivots) {
  const auto f = lu_factor(Matrix(Matrix::Identity(3, 3)));
  for (Index i = 0; i < 3; ++i) EXPECT_EQ(f.pivots()(i), 1.0);
}

TEST(LuFactor, DiagonalPivots) {
  const auto f = lu_factor(diag({2.0, 3.0}));
  std::vector<double> p{f.pivots()(0), f.pivots()(1)};
  std::sort(p.begin(), p.end());
  EXPECT_EQ(p[0], 2.0);
  EXPECT_EQ(p[1], 3.0);
}

TEST(LuFactor, RankOneIsSingular) {
  Matrix a(2, 2);
  a << 1.0, 1.0, 1.0, 1.0;
  try {
    lu_factor(a);
    FAIL() << "expected SingularMatrix";
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularMatrix);
  }
}

TEST(LuFactor, NeverHandsOutTinyPivots) {
  for (double eps : {1e-9, 1e-11, 1e-13}) {
    Matrix a(2, 2);
    a << 1.0, 1.0, 1.0, 1.0 + eps;
    const double rank_tol = 1e-10;
    try {
      const auto f = lu_factor(a, rank_tol);
      EXPECT_GT(f.min_pivot(), rank_tol * max_norm(a));
    } catch (const FlowError& e) {
      EXPECT_EQ(e.kind(), ErrorKind::SingularMatrix);
      EXPECT_LT(eps, rank_tol * 2);
    }
  }
}

TEST(Solve, Examples) {
  std::mt19937_64 rng(2);
  const Matrix b = cflow::testing::random_complex(rng, 3, 2);
  EXPECT_EQ(max_norm(solve(lu_factor(Matrix(Matrix::Identity(3, 3))), b) - b), 0.0);

  const Matrix half = solve(lu_factor(diag({2.0})), diag({1.0}));
  EXPECT_EQ(half(0, 0), Complex(0.5, 0));

  const Matrix a = diag({2.0, 4.0});
  EXPECT_LE(max_norm(solve(lu_factor(a), Matrix(Matrix::Identity(2, 2))) - diag({0.5, 0.25})), 1e-16);
}

TEST(Solve, RejectsWrongRowCount) {
  const auto f = lu_factor(Matrix(Matrix::Identity(3, 3)));
  EXPECT_THROW(f.solve(Matrix::Zero(2, 1)), FlowError);
}

TEST(Solve, InverseResidualOnRandomMatrices) {
  std::mt19937_64 rng(3);
  for (Index n = 1; n <= 8; ++n)
    for (int rep = 0; rep < 5; ++rep) {
      const Matrix a = cflow::testing::random_transform(rng, n);
      const Matrix inv = solve(lu_factor(a), Matrix(Matrix::Identity(n, n)));
      EXPECT_LE(max_norm(a * inv - Matrix::Identity(n, n)), 1e-10) << "n=" << n;
    }
}

TEST(PowerInt, Examples) {
  std::mt19937_64 rng(4);
  const Matrix a = cflow::testing::random_transform(rng, 3);
  EXPECT_EQ(max_norm(power_int(a, 0) - Matrix::Identity(3, 3)), 0.0);
  EXPECT_EQ(max_norm(power_int(diag({2.0, 3.0}), 3) - diag({8.0, 27.0})), 0.0);
  EXPECT_EQ(max_norm(power_int(diag({2.0}), -1) - diag({0.5})), 0.0);
}

TEST(PowerInt, ExponentsAdd) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix a = cflow::testing::random_transform(rng, 4) / 3.0 + Matrix(Matrix::Identity(4, 4));
    for (int j = -5; j <= 5; ++j)
      for (int k = -5; k <= 5; ++k)
        EXPECT_LE(relative_error(power_int(a, j) * power_int(a, k), power_int(a, j + k)), 1e-10)
            << "j=" << j << " k=" << k;
  }
}

TEST(MaxNorm, Examples) {
  EXPECT_EQ(max_norm(Matrix(Matrix::Zero(3, 3))), 0.0);
  EXPECT_EQ(max_norm(Matrix(Matrix::Identity(3, 3))), 1.0);
  Matrix a(1, 2);
  a << 3.0, Complex(0, -4);
  EXPECT_EQ(max_norm(a), 4.0);
}

TEST(ToleranceConfig, RejectsNonPositiveFields) {
  ToleranceConfig tol;
  EXPECT_NO_THROW(tol.validate());
  tol.cluster_tol = 0;
  EXPECT_THROW(tol.validate(), FlowError);
  tol = {};
  tol.rank_tol = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(tol.validate(), FlowError);
}

TEST(ToleranceConfig, Defaults) {
  const ToleranceConfig tol;
  EXPECT_EQ(tol.rank_tol, 1e-10);
  EXPECT_EQ(tol.root_tol, 1e-12);
  EXPECT_EQ(tol.cluster_tol, 1e-7);
  EXPECT_EQ(tol.residual_tol, 1e-9);
  EXPECT_EQ(tol.cond_warn, 1e12);
}
