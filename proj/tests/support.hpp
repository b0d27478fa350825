#pragma once

#include "mcckf/linalg.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace mcckf::testing
{

inline Eigen::MatrixXd to_eigen(const Matrix& m)
{
        Eigen::MatrixXd e(m.rows(), m.cols());
        for (std::size_t i = 0; i < m.rows(); ++i)
        {
                for (std::size_t j = 0; j < m.cols(); ++j)
                {
                        e(i, j) = m(i, j);
                }
        }
        return e;
}

inline Matrix from_eigen(const Eigen::MatrixXd& e)
{
        Matrix m(e.rows(), e.cols());
        for (Eigen::Index i = 0; i < e.rows(); ++i)
        {
                for (Eigen::Index j = 0; j < e.cols(); ++j)
                {
                        m(i, j) = e(i, j);
                }
        }
        return m;
}

/// ||a - b||_F / ||b||_F, or ||a - b||_F when b vanishes.
inline double relative_error(const Matrix& a, const Matrix& b)
{
        const double diff = (a - b).frobenius_norm();
        const double scale = b.frobenius_norm();
        return scale == 0 ? diff : diff / scale;
}

class Generator
{
public:
        explicit Generator(std::uint64_t seed)
                : engine_(seed)
        {
        }

        double uniform(double lo, double hi)
        {
                return std::uniform_real_distribution<double>(lo, hi)(engine_);
        }

        std::size_t index(std::size_t lo, std::size_t hi)
        {
                return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
        }

        Matrix dense(std::size_t rows, std::size_t cols)
        {
                Matrix m(rows, cols);
                for (double& v : m.data())
                {
                        v = normal_(engine_);
                }
                return m;
        }

        /// Q diag(s) Q^T with log-uniform spectrum in [1, condition].
        Matrix spd(std::size_t n, double condition)
        {
                const Eigen::HouseholderQR<Eigen::MatrixXd> qr(to_eigen(dense(n, n)));
                const Eigen::MatrixXd q = qr.householderQ();
                Eigen::VectorXd s(n);
                for (std::size_t i = 0; i < n; ++i)
                {
                        s(i) = std::pow(condition, uniform(0, 1));
                }
                if (n > 1)
                {
                        s(0) = 1;
                        s(1) = condition;
                }
                const Eigen::MatrixXd a = q * s.asDiagonal() * q.transpose();
                return symmetrized(from_eigen(a));
        }

private:
        std::mt19937_64 engine_;
        std::normal_distribution<double> normal_;
};

} // namespace mcckf::testing
