#include "mcckf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace mcckf
{
namespace
{
constexpr double EPS = std::numeric_limits<double>::epsilon();
constexpr double SYMMETRY_TOLERANCE = 1e-9;
constexpr double PD_FLOOR = 1e2 * EPS;

std::string shape(const Matrix& m)
{
        std::ostringstream oss;
        oss << m.rows() << "x" << m.cols();
        return oss.str();
}

void require(bool condition, LinalgErrorKind kind, const std::string& what)
{
        if (!condition)
        {
                throw LinalgError(kind, what);
        }
}

// Overflow-safe 2-norm of a strided sequence.
template <typename Get>
double scaled_norm(std::size_t count, Get get)
{
        double scale = 0;
        for (std::size_t i = 0; i < count; ++i)
        {
                scale = std::max(scale, std::abs(get(i)));
        }
        if (scale == 0 || !std::isfinite(scale))
        {
                return scale;
        }
        double sum = 0;
        for (std::size_t i = 0; i < count; ++i)
        {
                const double v = get(i) / scale;
                sum += v * v;
        }
        return scale * std::sqrt(sum);
}

bool is_singular_pivot(double d)
{
        return !(std::abs(d) >= std::numeric_limits<double>::min());
}

Matrix check_symmetric(const Matrix& a)
{
        require(a.is_square(), LinalgErrorKind::DimensionMismatch, "cholesky: matrix is " + shape(a));
        require(a.all_finite(), LinalgErrorKind::NonFiniteInput, "cholesky: non-finite entry");
        const double scale = a.max_abs();
        double asym = 0;
        for (std::size_t i = 0; i < a.rows(); ++i)
        {
                for (std::size_t j = 0; j < i; ++j)
                {
                        asym = std::max(asym, std::abs(a(i, j) - a(j, i)));
                }
        }
        require(asym <= SYMMETRY_TOLERANCE * scale, LinalgErrorKind::NotSymmetric,
                "cholesky: asymmetry exceeds relative tolerance");
        return symmetrized(a);
}

Matrix cholesky_impl(const Matrix& input, bool semidefinite)
{
        const Matrix a = check_symmetric(input);
        const std::size_t n = a.rows();
        Matrix l(n, n);
        for (std::size_t j = 0; j < n; ++j)
        {
                const double row_norm = scaled_norm(n, [&](std::size_t k) { return a(j, k); });
                double d = a(j, j);
                for (std::size_t k = 0; k < j; ++k)
                {
                        d -= l(j, k) * l(j, k);
                }
                if (!(d > PD_FLOOR * row_norm))
                {
                        if (semidefinite)
                        {
                                continue;
                        }
                        std::ostringstream oss;
                        oss << "cholesky: pivot " << d << " at index " << j << " below positive-definite floor";
                        throw LinalgError(LinalgErrorKind::NotPositiveDefinite, oss.str());
                }
                const double pivot = std::sqrt(d);
                l(j, j) = pivot;
                for (std::size_t i = j + 1; i < n; ++i)
                {
                        double s = a(i, j);
                        for (std::size_t k = 0; k < j; ++k)
                        {
                                s -= l(i, k) * l(j, k);
                        }
                        l(i, j) = s / pivot;
                }
        }
        return l;
}
} // namespace

const char* to_string(LinalgErrorKind kind)
{
        switch (kind)
        {
        case LinalgErrorKind::NotPositiveDefinite:
                return "NotPositiveDefinite";
        case LinalgErrorKind::NotSymmetric:
                return "NotSymmetric";
        case LinalgErrorKind::NonFiniteInput:
                return "NonFiniteInput";
        case LinalgErrorKind::SingularFactor:
                return "SingularFactor";
        case LinalgErrorKind::DimensionMismatch:
                return "DimensionMismatch";
        }
        return "Unknown";
}

LinalgError::LinalgError(LinalgErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what),
          kind_(kind)
{
}

//

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
        : rows_(rows),
          cols_(cols),
          data_(rows * cols, fill)
{
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
        : rows_(rows.size()),
          cols_(rows.size() == 0 ? 0 : rows.begin()->size())
{
        data_.reserve(rows_ * cols_);
        for (const auto& row : rows)
        {
                require(row.size() == cols_, LinalgErrorKind::DimensionMismatch, "ragged initializer list");
                data_.insert(data_.end(), row.begin(), row.end());
        }
}

Matrix Matrix::identity(std::size_t n)
{
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
        {
                m(i, i) = 1;
        }
        return m;
}

Matrix Matrix::zeros(std::size_t rows, std::size_t cols)
{
        return Matrix(rows, cols);
}

Matrix Matrix::diagonal(std::span<const double> values)
{
        Matrix m(values.size(), values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
        {
                m(i, i) = values[i];
        }
        return m;
}

Matrix Matrix::column(std::span<const double> values)
{
        Matrix m(values.size(), 1);
        std::copy(values.begin(), values.end(), m.data_.begin());
        return m;
}

Matrix Matrix::column(std::initializer_list<double> values)
{
        return column(std::span<const double>(values.begin(), values.size()));
}

Matrix Matrix::transposed() const
{
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
        {
                for (std::size_t j = 0; j < cols_; ++j)
                {
                        t(j, i) = (*this)(i, j);
                }
        }
        return t;
}

Matrix Matrix::block(std::size_t row, std::size_t col, std::size_t rows, std::size_t cols) const
{
        require(row + rows <= rows_ && col + cols <= cols_, LinalgErrorKind::DimensionMismatch,
                "block out of range of " + shape(*this));
        Matrix b(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
        {
                for (std::size_t j = 0; j < cols; ++j)
                {
                        b(i, j) = (*this)(row + i, col + j);
                }
        }
        return b;
}

void Matrix::set_block(std::size_t row, std::size_t col, const Matrix& m)
{
        require(row + m.rows() <= rows_ && col + m.cols() <= cols_, LinalgErrorKind::DimensionMismatch,
                "set_block " + shape(m) + " out of range of " + shape(*this));
        for (std::size_t i = 0; i < m.rows(); ++i)
        {
                for (std::size_t j = 0; j < m.cols(); ++j)
                {
                        (*this)(row + i, col + j) = m(i, j);
                }
        }
}

bool Matrix::all_finite() const noexcept
{
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Matrix::max_abs() const noexcept
{
        double m = 0;
        for (double v : data_)
        {
                if (std::isnan(v))
                {
                        return v;
                }
                m = std::max(m, std::abs(v));
        }
        return m;
}

double Matrix::frobenius_norm() const noexcept
{
        return scaled_norm(data_.size(), [&](std::size_t i) { return data_[i]; });
}

Matrix& Matrix::operator+=(const Matrix& other)
{
        require(rows_ == other.rows_ && cols_ == other.cols_, LinalgErrorKind::DimensionMismatch,
                shape(*this) + " + " + shape(other));
        for (std::size_t i = 0; i < data_.size(); ++i)
        {
                data_[i] += other.data_[i];
        }
        return *this;
}

Matrix& Matrix::operator-=(const Matrix& other)
{
        require(rows_ == other.rows_ && cols_ == other.cols_, LinalgErrorKind::DimensionMismatch,
                shape(*this) + " - " + shape(other));
        for (std::size_t i = 0; i < data_.size(); ++i)
        {
                data_[i] -= other.data_[i];
        }
        return *this;
}

Matrix& Matrix::operator*=(double s)
{
        for (double& v : data_)
        {
                v *= s;
        }
        return *this;
}

Matrix operator+(Matrix a, const Matrix& b)
{
        a += b;
        return a;
}

Matrix operator-(Matrix a, const Matrix& b)
{
        a -= b;
        return a;
}

Matrix operator*(const Matrix& a, const Matrix& b)
{
        require(a.cols() == b.rows(), LinalgErrorKind::DimensionMismatch, shape(a) + " * " + shape(b));
        Matrix c(a.rows(), b.cols());
        for (std::size_t i = 0; i < a.rows(); ++i)
        {
                for (std::size_t k = 0; k < a.cols(); ++k)
                {
                        const double aik = a(i, k);
                        for (std::size_t j = 0; j < b.cols(); ++j)
                        {
                                c(i, j) += aik * b(k, j);
                        }
                }
        }
        return c;
}

Matrix operator*(double s, Matrix a)
{
        a *= s;
        return a;
}

Matrix operator*(Matrix a, double s)
{
        a *= s;
        return a;
}

Matrix symmetrized(const Matrix& a)
{
        require(a.is_square(), LinalgErrorKind::DimensionMismatch, "symmetrized: matrix is " + shape(a));
        Matrix s = a;
        for (std::size_t i = 0; i < a.rows(); ++i)
        {
                for (std::size_t j = 0; j < i; ++j)
                {
                        const double v = 0.5 * (a(i, j) + a(j, i));
                        s(i, j) = v;
                        s(j, i) = v;
                }
        }
        return s;
}

//

LowerTriangular::LowerTriangular(Matrix m, Unchecked)
        : m_(std::move(m))
{
}

LowerTriangular::LowerTriangular(Matrix m)
        : m_(std::move(m))
{
        require(m_.is_square(), LinalgErrorKind::DimensionMismatch, "lower triangular factor is " + shape(m_));
        const std::size_t n = m_.rows();
        for (std::size_t i = 0; i < n; ++i)
        {
                for (std::size_t j = i + 1; j < n; ++j)
                {
                        require(m_(i, j) == 0, LinalgErrorKind::DimensionMismatch,
                                "lower triangular factor has nonzero entry above the diagonal");
                }
        }
        for (std::size_t j = 0; j < n; ++j)
        {
                if (m_(j, j) < 0)
                {
                        for (std::size_t i = j; i < n; ++i)
                        {
                                m_(i, j) = -m_(i, j);
                        }
                }
        }
}

LowerTriangular LowerTriangular::identity(std::size_t n)
{
        return LowerTriangular(Matrix::identity(n), Unchecked{});
}

LowerTriangular LowerTriangular::diagonal(std::span<const double> values)
{
        return LowerTriangular(Matrix::diagonal(values));
}

Matrix LowerTriangular::gram() const
{
        const std::size_t n = dim();
        Matrix g(n, n);
        for (std::size_t i = 0; i < n; ++i)
        {
                for (std::size_t j = 0; j <= i; ++j)
                {
                        double s = 0;
                        for (std::size_t k = 0; k <= j; ++k)
                        {
                                s += m_(i, k) * m_(j, k);
                        }
                        g(i, j) = s;
                        g(j, i) = s;
                }
        }
        return g;
}

bool LowerTriangular::has_positive_diagonal() const noexcept
{
        for (std::size_t i = 0; i < dim(); ++i)
        {
                if (!(m_(i, i) > 0))
                {
                        return false;
                }
        }
        return true;
}

Matrix operator*(const LowerTriangular& l, const Matrix& b)
{
        require(l.dim() == b.rows(), LinalgErrorKind::DimensionMismatch,
                shape(l.matrix()) + " * " + shape(b));
        Matrix c(b.rows(), b.cols());
        for (std::size_t i = 0; i < l.dim(); ++i)
        {
                for (std::size_t k = 0; k <= i; ++k)
                {
                        const double lik = l(i, k);
                        for (std::size_t j = 0; j < b.cols(); ++j)
                        {
                                c(i, j) += lik * b(k, j);
                        }
                }
        }
        return c;
}

//

LowerTriangular cholesky_lower(const Matrix& a)
{
        return LowerTriangular(cholesky_impl(a, false), LowerTriangular::Unchecked{});
}

LowerTriangular cholesky_lower_semidefinite(const Matrix& a)
{
        return LowerTriangular(cholesky_impl(a, true), LowerTriangular::Unchecked{});
}

LowerTriangular lower_triangularize(const Matrix& pre_array)
{
        const std::size_t rows = pre_array.rows();
        const std::size_t cols = pre_array.cols();
        require(rows <= cols, LinalgErrorKind::DimensionMismatch,
                "lower_triangularize: pre-array " + shape(pre_array) + " has more rows than columns");
        require(pre_array.all_finite(), LinalgErrorKind::NonFiniteInput, "lower_triangularize: non-finite pre-array");

        Matrix a = pre_array;
        std::vector<double> v(cols);
        for (std::size_t i = 0; i < rows; ++i)
        {
                const std::size_t len = cols - i;
                const double alpha = scaled_norm(len, [&](std::size_t j) { return a(i, i + j); });
                if (alpha == 0)
                {
                        continue;
                }
                // Reflector H = I - tau v v^T maps row i's tail onto beta e_1.
                const double x0 = a(i, i);
                const double beta = x0 >= 0 ? -alpha : alpha;
                v[0] = x0 - beta;
                for (std::size_t j = 1; j < len; ++j)
                {
                        v[j] = a(i, i + j);
                }
                // v^T v = 2 alpha (alpha + |x0|) = -2 beta v0
                const double tau = 1.0 / (-beta * v[0]);
                for (std::size_t p = i + 1; p < rows; ++p)
                {
                        double s = 0;
                        for (std::size_t j = 0; j < len; ++j)
                        {
                                s += a(p, i + j) * v[j];
                        }
                        s *= tau;
                        for (std::size_t j = 0; j < len; ++j)
                        {
                                a(p, i + j) -= s * v[j];
                        }
                }
                a(i, i) = beta;
                for (std::size_t j = 1; j < len; ++j)
                {
                        a(i, i + j) = 0;
                }
        }

        Matrix x(rows, rows);
        for (std::size_t i = 0; i < rows; ++i)
        {
                for (std::size_t j = 0; j <= i; ++j)
                {
                        x(i, j) = a(i, j);
                }
        }
        return LowerTriangular(std::move(x));
}

Matrix triangular_solve(const LowerTriangular& l, const Matrix& b, bool transposed)
{
        const std::size_t n = l.dim();
        require(b.rows() == n, LinalgErrorKind::DimensionMismatch,
                "triangular_solve: factor " + shape(l.matrix()) + ", rhs " + shape(b));
        for (std::size_t i = 0; i < n; ++i)
        {
                if (is_singular_pivot(l(i, i)))
                {
                        std::ostringstream oss;
                        oss << "triangular_solve: diagonal entry " << l(i, i) << " at index " << i;
                        throw LinalgError(LinalgErrorKind::SingularFactor, oss.str());
                }
        }

        Matrix x = b;
        for (std::size_t c = 0; c < b.cols(); ++c)
        {
                if (!transposed)
                {
                        for (std::size_t i = 0; i < n; ++i)
                        {
                                double s = x(i, c);
                                for (std::size_t k = 0; k < i; ++k)
                                {
                                        s -= l(i, k) * x(k, c);
                                }
                                x(i, c) = s / l(i, i);
                        }
                }
                else
                {
                        for (std::size_t i = n; i-- > 0;)
                        {
                                double s = x(i, c);
                                for (std::size_t k = i + 1; k < n; ++k)
                                {
                                        s -= l(k, i) * x(k, c);
                                }
                                x(i, c) = s / l(i, i);
                        }
                }
        }
        return x;
}

LowerTriangular triangular_inverse(const LowerTriangular& l)
{
        return LowerTriangular(triangular_solve(l, Matrix::identity(l.dim())), LowerTriangular::Unchecked{});
}

Matrix lu_solve(const Matrix& a, const Matrix& b)
{
        require(a.is_square() && a.rows() == b.rows(), LinalgErrorKind::DimensionMismatch,
                "lu_solve: " + shape(a) + " \\ " + shape(b));
        const std::size_t n = a.rows();
        Matrix lu = a;
        Matrix x = b;
        for (std::size_t k = 0; k < n; ++k)
        {
                std::size_t pivot = k;
                for (std::size_t i = k + 1; i < n; ++i)
                {
                        if (std::abs(lu(i, k)) > std::abs(lu(pivot, k)))
                        {
                                pivot = i;
                        }
                }
                if (is_singular_pivot(lu(pivot, k)))
                {
                        throw LinalgError(LinalgErrorKind::SingularFactor, "lu_solve: singular matrix");
                }
                if (pivot != k)
                {
                        for (std::size_t j = 0; j < n; ++j)
                        {
                                std::swap(lu(k, j), lu(pivot, j));
                        }
                        for (std::size_t j = 0; j < x.cols(); ++j)
                        {
                                std::swap(x(k, j), x(pivot, j));
                        }
                }
                for (std::size_t i = k + 1; i < n; ++i)
                {
                        const double f = lu(i, k) / lu(k, k);
                        lu(i, k) = f;
                        for (std::size_t j = k + 1; j < n; ++j)
                        {
                                lu(i, j) -= f * lu(k, j);
                        }
                        for (std::size_t j = 0; j < x.cols(); ++j)
                        {
                                x(i, j) -= f * x(k, j);
                        }
                }
        }
        for (std::size_t j = 0; j < x.cols(); ++j)
        {
                for (std::size_t i = n; i-- > 0;)
                {
                        double s = x(i, j);
                        for (std::size_t k = i + 1; k < n; ++k)
                        {
                                s -= lu(i, k) * x(k, j);
                        }
                        x(i, j) = s / lu(i, i);
                }
        }
        return x;
}

double condition_estimate(const Matrix& m)
{
        constexpr double INF = std::numeric_limits<double>::infinity();
        require(m.is_square(), LinalgErrorKind::DimensionMismatch, "condition_estimate: matrix is " + shape(m));
        if (!m.all_finite())
        {
                return INF;
        }
        const auto norm1 = [](const Matrix& a)
        {
                double best = 0;
                for (std::size_t j = 0; j < a.cols(); ++j)
                {
                        double s = 0;
                        for (std::size_t i = 0; i < a.rows(); ++i)
                        {
                                s += std::abs(a(i, j));
                        }
                        best = std::max(best, s);
                }
                return best;
        };
        try
        {
                const double c = norm1(m) * norm1(lu_solve(m, Matrix::identity(m.rows())));
                return std::isfinite(c) ? c : INF;
        }
        catch (const LinalgError&)
        {
                return INF;
        }
}

} // namespace mcckf
