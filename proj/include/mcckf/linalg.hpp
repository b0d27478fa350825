#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcckf
{

enum class LinalgErrorKind
{
        NotPositiveDefinite,
        NotSymmetric,
        NonFiniteInput,
        SingularFactor,
        DimensionMismatch,
};

const char* to_string(LinalgErrorKind kind);

class LinalgError : public std::runtime_error
{
public:
        LinalgError(LinalgErrorKind kind, const std::string& what);

        LinalgErrorKind kind() const noexcept
        {
                return kind_;
        }

private:
        LinalgErrorKind kind_;
};

/// Dense row-major real matrix. Column vectors are n x 1 matrices.
class Matrix
{
public:
        Matrix() = default;
        Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
        Matrix(std::initializer_list<std::initializer_list<double>> rows);

        static Matrix identity(std::size_t n);
        static Matrix zeros(std::size_t rows, std::size_t cols);
        static Matrix diagonal(std::span<const double> values);
        static Matrix column(std::span<const double> values);
        static Matrix column(std::initializer_list<double> values);

        std::size_t rows() const noexcept
        {
                return rows_;
        }
        std::size_t cols() const noexcept
        {
                return cols_;
        }
        std::size_t size() const noexcept
        {
                return data_.size();
        }
        bool is_square() const noexcept
        {
                return rows_ == cols_;
        }

        double& operator()(std::size_t i, std::size_t j)
        {
                return data_[i * cols_ + j];
        }
        double operator()(std::size_t i, std::size_t j) const
        {
                return data_[i * cols_ + j];
        }

        // Vector-style access for n x 1 matrices.
        double& operator[](std::size_t i)
        {
                return data_[i];
        }
        double operator[](std::size_t i) const
        {
                return data_[i];
        }

        std::span<const double> data() const noexcept
        {
                return data_;
        }
        std::span<double> data() noexcept
        {
                return data_;
        }

        Matrix transposed() const;
        Matrix block(std::size_t row, std::size_t col, std::size_t rows, std::size_t cols) const;
        void set_block(std::size_t row, std::size_t col, const Matrix& m);

        bool all_finite() const noexcept;
        double max_abs() const noexcept;
        double frobenius_norm() const noexcept;

        Matrix& operator+=(const Matrix& other);
        Matrix& operator-=(const Matrix& other);
        Matrix& operator*=(double s);

        friend bool operator==(const Matrix&, const Matrix&) = default;

private:
        std::size_t rows_ = 0;
        std::size_t cols_ = 0;
        std::vector<double> data_;
};

using Vector = Matrix;

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(Matrix a, double s);

/// (a + a^T) / 2
Matrix symmetrized(const Matrix& a);

/// Lower-triangular square factor with nonnegative diagonal.
///
/// Construction checks that the strictly upper part is exactly zero. Columns
/// with a negative diagonal entry are negated, which leaves L L^T unchanged.
class LowerTriangular
{
public:
        LowerTriangular() = default;
        explicit LowerTriangular(Matrix m);

        static LowerTriangular identity(std::size_t n);
        static LowerTriangular diagonal(std::span<const double> values);

        std::size_t dim() const noexcept
        {
                return m_.rows();
        }
        double operator()(std::size_t i, std::size_t j) const
        {
                return m_(i, j);
        }
        const Matrix& matrix() const noexcept
        {
                return m_;
        }

        /// L * L^T
        Matrix gram() const;

        bool has_positive_diagonal() const noexcept;

        friend bool operator==(const LowerTriangular&, const LowerTriangular&) = default;

private:
        struct Unchecked
        {
        };
        LowerTriangular(Matrix m, Unchecked);

        friend LowerTriangular lower_triangularize(const Matrix& pre_array);
        friend LowerTriangular cholesky_lower(const Matrix& a);
        friend LowerTriangular cholesky_lower_semidefinite(const Matrix& a);
        friend LowerTriangular triangular_inverse(const LowerTriangular& l);

        Matrix m_;
};

Matrix operator*(const LowerTriangular& l, const Matrix& b);

/// Cholesky factor L with L L^T = a. The input is symmetrized first; asymmetry
/// beyond 1e-9 relative raises NotSymmetric, and a pivot below the
/// positive-definiteness floor (1e2 * eps * row norm) raises NotPositiveDefinite.
LowerTriangular cholesky_lower(const Matrix& a);

/// Cholesky factor of a symmetric positive semidefinite matrix; pivots at or
/// below the floor produce zero columns instead of an error. Used for noise
/// generation where degenerate covariances are legal.
LowerTriangular cholesky_lower_semidefinite(const Matrix& a);

/// Orthogonal lower triangularization of a rows x cols pre-array (rows <= cols)
/// by Householder reflections applied from the right. Returns the leading
/// rows x rows block X of the post-array [X, 0], so X X^T = A A^T.
LowerTriangular lower_triangularize(const Matrix& pre_array);

/// Solves l x = b, or l^T x = b when transposed is set.
Matrix triangular_solve(const LowerTriangular& l, const Matrix& b, bool transposed = false);

LowerTriangular triangular_inverse(const LowerTriangular& l);

/// 1-norm condition number ||m||_1 ||m^-1||_1, +inf for singular or non-finite input.
double condition_estimate(const Matrix& m);

/// General solve a x = b by LU with partial pivoting.
Matrix lu_solve(const Matrix& a, const Matrix& b);

} // namespace mcckf
