#include "mcckf/linalg.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace mcckf;
using mcckf::testing::Generator;
using mcckf::testing::relative_error;
using mcckf::testing::to_eigen;

namespace
{
void expect_lower_with_nonnegative_diagonal(const LowerTriangular& l)
{
        for (std::size_t i = 0; i < l.dim(); ++i)
        {
                EXPECT_GE(l(i, i), 0.0);
                for (std::size_t j = i + 1; j < l.dim(); ++j)
                {
                        EXPECT_EQ(l(i, j), 0.0);
                }
        }
}
} // namespace

TEST(Matrix, ArithmeticAndShape)
{
        const Matrix a{{1, 2}, {3, 4}};
        const Matrix b{{0, 1}, {1, 0}};
        EXPECT_EQ(a * b, (Matrix{{2, 1}, {4, 3}}));
        EXPECT_EQ(a + b, (Matrix{{1, 3}, {4, 4}}));
        EXPECT_EQ(a.transposed(), (Matrix{{1, 3}, {2, 4}}));
        EXPECT_EQ(a.block(1, 0, 1, 2), (Matrix{{3, 4}}));
        EXPECT_THROW(a * Matrix(3, 1), LinalgError);
}

TEST(Cholesky, Identity)
{
        EXPECT_EQ(cholesky_lower(Matrix::identity(3)).matrix(), Matrix::identity(3));
}

TEST(Cholesky, TwoByTwoByHand)
{
        const Matrix a{{4, 2}, {2, 3}};
        const LowerTriangular l = cholesky_lower(a);
        EXPECT_DOUBLE_EQ(l(0, 0), 2);
        EXPECT_DOUBLE_EQ(l(1, 0), 1);
        EXPECT_DOUBLE_EQ(l(1, 1), std::sqrt(2.0));
        EXPECT_LT(relative_error(l.gram(), a), 1e-15);
}

TEST(Cholesky, RadarMeasurementNoise)
{
        const double d[] = {1000.0 * 1000.0, 0.017 * 0.017};
        const LowerTriangular l = cholesky_lower(Matrix::diagonal(d));
        EXPECT_DOUBLE_EQ(l(0, 0), 1000);
        EXPECT_DOUBLE_EQ(l(1, 1), 0.017);
        EXPECT_EQ(l(1, 0), 0.0);
}

TEST(Cholesky, RejectsIndefiniteAndAsymmetric)
{
        try
        {
                cholesky_lower(Matrix{{1, 2}, {2, 1}});
                FAIL() << "expected NotPositiveDefinite";
        }
        catch (const LinalgError& e)
        {
                EXPECT_EQ(e.kind(), LinalgErrorKind::NotPositiveDefinite);
        }
        try
        {
                cholesky_lower(Matrix{{2, 1}, {0, 2}});
                FAIL() << "expected NotSymmetric";
        }
        catch (const LinalgError& e)
        {
                EXPECT_EQ(e.kind(), LinalgErrorKind::NotSymmetric);
        }
        // Asymmetry at the 1e-12 level is roundoff and gets symmetrized away.
        EXPECT_NO_THROW(cholesky_lower(Matrix{{2, 1 + 1e-12}, {1, 2}}));
}

TEST(Cholesky, PivotBelowFloorIsNotPositiveDefinite)
{
        const Matrix nearly_singular{{1, 1}, {1, 1 + 1e-15}};
        try
        {
                cholesky_lower(nearly_singular);
                FAIL() << "expected NotPositiveDefinite";
        }
        catch (const LinalgError& e)
        {
                EXPECT_EQ(e.kind(), LinalgErrorKind::NotPositiveDefinite);
        }
        const LowerTriangular psd = cholesky_lower_semidefinite(Matrix{{1, 1}, {1, 1}});
        EXPECT_EQ(psd(1, 1), 0.0);
        EXPECT_LT(relative_error(psd.gram(), Matrix{{1, 1}, {1, 1}}), 1e-15);
}

TEST(Cholesky, RandomSpdReconstruction)
{
        Generator gen(11);
        for (int trial = 0; trial < 500; ++trial)
        {
                const std::size_t n = gen.index(1, 10);
                const Matrix a = gen.spd(n, std::pow(10.0, gen.uniform(0, 6)));
                const LowerTriangular l = cholesky_lower(a);
                expect_lower_with_nonnegative_diagonal(l);
                ASSERT_LT(relative_error(l.gram(), a), 1e-12) << "trial " << trial;
        }
}

TEST(LowerTriangularize, PaddedTriangularIsUnchanged)
{
        const Matrix l{{2, 0, 0}, {1, 3, 0}, {-1, 0.5, 1}};
        Matrix pre(3, 5);
        pre.set_block(0, 0, l);
        const LowerTriangular x = lower_triangularize(pre);
        EXPECT_LT(relative_error(x.matrix(), l), 1e-15);
}

TEST(LowerTriangularize, RowVector)
{
        const LowerTriangular x = lower_triangularize(Matrix{{3, 4}});
        EXPECT_DOUBLE_EQ(x(0, 0), 5);
}

TEST(LowerTriangularize, GramPreservationAgainstEigen)
{
        Generator gen(12);
        for (int trial = 0; trial < 500; ++trial)
        {
                const std::size_t rows = gen.index(1, 8);
                const std::size_t cols = rows + gen.index(0, 8);
                const Matrix a = gen.dense(rows, cols);
                const LowerTriangular x = lower_triangularize(a);
                expect_lower_with_nonnegative_diagonal(x);
                const Eigen::MatrixXd gram = to_eigen(a) * to_eigen(a).transpose();
                ASSERT_LT((to_eigen(x.gram()) - gram).norm() / gram.norm(), 1e-12) << "trial " << trial;
        }
}

TEST(LowerTriangularize, MatchesCholeskyOfGram)
{
        // Positive diagonals make the factor unique, so both routes must agree.
        Generator gen(13);
        for (int trial = 0; trial < 100; ++trial)
        {
                const Matrix a = gen.dense(4, 9);
                const Matrix expected = cholesky_lower(a * a.transposed()).matrix();
                ASSERT_LT(relative_error(lower_triangularize(a).matrix(), expected), 1e-10);
        }
}

TEST(LowerTriangularize, IdempotentOnPaddedOutput)
{
        Generator gen(14);
        for (int trial = 0; trial < 100; ++trial)
        {
                const LowerTriangular x = lower_triangularize(gen.dense(5, 8));
                Matrix padded(5, 9);
                padded.set_block(0, 0, x.matrix());
                ASSERT_LT(relative_error(lower_triangularize(padded).matrix(), x.matrix()), 1e-14);
        }
}

TEST(LowerTriangularize, RankDeficientGivesZeroDiagonal)
{
        const LowerTriangular x = lower_triangularize(Matrix{{1, 2, 3}, {2, 4, 6}});
        EXPECT_NEAR(x(1, 1), 0.0, 1e-14);
        EXPECT_GE(x(1, 1), 0.0);
}

TEST(LowerTriangularize, RejectsNonFinite)
{
        Matrix a{{1, std::numeric_limits<double>::quiet_NaN()}};
        try
        {
                lower_triangularize(a);
                FAIL() << "expected NonFiniteInput";
        }
        catch (const LinalgError& e)
        {
                EXPECT_EQ(e.kind(), LinalgErrorKind::NonFiniteInput);
        }
        EXPECT_THROW(lower_triangularize(Matrix(3, 2)), LinalgError);
}

TEST(TriangularSolve, Examples)
{
        const Matrix b{{0.3}, {-2}};
        EXPECT_EQ(triangular_solve(LowerTriangular::identity(2), b), b);

        const LowerTriangular l(Matrix{{2, 0}, {1, std::sqrt(2.0)}});
        const Matrix rhs{{2}, {1 + std::sqrt(2.0)}};
        const Matrix x = triangular_solve(l, rhs);
        EXPECT_NEAR(x[0], 1, 1e-15);
        EXPECT_NEAR(x[1], 1, 1e-15);
        EXPECT_LE(((l * x) - rhs).frobenius_norm(), 1e-12 * rhs.frobenius_norm());

        const double d[] = {1000, 0.017};
        const Matrix inv = triangular_solve(LowerTriangular::diagonal(d), Matrix::identity(2));
        EXPECT_DOUBLE_EQ(inv(0, 0), 1e-3);
        EXPECT_DOUBLE_EQ(inv(1, 1), 1 / 0.017);
        EXPECT_EQ(inv(1, 0), 0.0);
}

TEST(TriangularSolve, RoundTripBothOrientations)
{
        Generator gen(15);
        for (int trial = 0; trial < 300; ++trial)
        {
                const std::size_t n = gen.index(1, 10);
                const LowerTriangular l = cholesky_lower(gen.spd(n, 100));
                const Matrix b = gen.dense(n, gen.index(1, 3));
                const Matrix x = triangular_solve(l, b);
                ASSERT_LE((l * x - b).frobenius_norm(), 1e-12 * b.frobenius_norm());
                const Matrix y = triangular_solve(l, b, true);
                ASSERT_LE((l.matrix().transposed() * y - b).frobenius_norm(), 1e-12 * b.frobenius_norm());
        }
}

TEST(TriangularSolve, SingularFactor)
{
        const LowerTriangular l(Matrix{{1, 0}, {1, 0}});
        try
        {
                triangular_solve(l, Matrix{{1}, {1}});
                FAIL() << "expected SingularFactor";
        }
        catch (const LinalgError& e)
        {
                EXPECT_EQ(e.kind(), LinalgErrorKind::SingularFactor);
        }
        const LowerTriangular subnormal(Matrix{{1e-310}});
        EXPECT_THROW(triangular_inverse(subnormal), LinalgError);
}

TEST(TriangularInverse, Examples)
{
        EXPECT_EQ(triangular_inverse(LowerTriangular::identity(3)).matrix(), Matrix::identity(3));
        const double d[] = {2, 4};
        EXPECT_EQ(triangular_inverse(LowerTriangular::diagonal(d)).matrix(), (Matrix{{0.5, 0}, {0, 0.25}}));

        const LowerTriangular l(Matrix{{2, 0}, {1, std::sqrt(2.0)}});
        const LowerTriangular inv = triangular_inverse(l);
        EXPECT_DOUBLE_EQ(inv(0, 0), 0.5);
        EXPECT_DOUBLE_EQ(inv(1, 0), -1 / (2 * std::sqrt(2.0)));
        EXPECT_DOUBLE_EQ(inv(1, 1), 1 / std::sqrt(2.0));
        EXPECT_LT(relative_error(l * inv.matrix(), Matrix::identity(2)), 1e-15);
}

TEST(ConditionEstimate, Examples)
{
        EXPECT_DOUBLE_EQ(condition_estimate(Matrix::identity(4)), 1);
        const double d[] = {1, 1e-8};
        const double k = condition_estimate(Matrix::diagonal(d));
        EXPECT_GE(k, 0.5e8);
        EXPECT_LE(k, 2e8);
        EXPECT_EQ(condition_estimate(Matrix{{1, 1}, {1, 1}}), std::numeric_limits<double>::infinity());
        EXPECT_EQ(
                condition_estimate(Matrix{{1, std::numeric_limits<double>::infinity()}, {0, 1}}),
                std::numeric_limits<double>::infinity());
}

TEST(ConditionEstimate, NearlyCollinearRowsAgainstSingularValues)
{
        // Two measurement rows of ones, the second ending in 1 + delta.
        double previous = 0;
        for (double delta : {1e-2, 1e-3, 1e-4})
        {
                Matrix h(2, 6, 1.0);
                h(1, 5) = 1 + delta;
                const Matrix hht = h * h.transposed();

                const Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(hht));
                const double sv_condition = svd.singularValues()(0) / svd.singularValues()(1);
                const double k = condition_estimate(hht);
                EXPECT_GE(k, sv_condition / 2);
                EXPECT_LE(k, sv_condition * 4);
                EXPECT_GT(k, previous * 50) << "condition must grow like delta^-2";
                previous = k;
                if (delta == 1e-4)
                {
                        EXPECT_GE(k, 1e7);
                }
        }
}

TEST(LuSolve, AgreesWithEigen)
{
        Generator gen(16);
        for (int trial = 0; trial < 100; ++trial)
        {
                const std::size_t n = gen.index(1, 6);
                const Matrix a = gen.dense(n, n);
                const Matrix b = gen.dense(n, 2);
                const Eigen::MatrixXd expected = to_eigen(a).partialPivLu().solve(to_eigen(b));
                ASSERT_LT((to_eigen(lu_solve(a, b)) - expected).norm() / expected.norm(), 1e-9);
        }
}
