#include "mcckf/model.hpp"

#include <sstream>
#include <stdexcept>

namespace mcckf
{
namespace
{
std::string shape(const Matrix& m)
{
        std::ostringstream oss;
        oss << m.rows() << "x" << m.cols();
        return oss.str();
}

void check_shape(
        ValidationReport& report,
        const char* name,
        const Matrix& m,
        std::size_t rows,
        std::size_t cols)
{
        if (m.rows() != rows || m.cols() != cols)
        {
                std::ostringstream oss;
                oss << name << " is " << shape(m) << ", expected " << rows << "x" << cols;
                report.push_back({ViolationKind::Dimension, oss.str()});
        }
        else if (!m.all_finite())
        {
                report.push_back({ViolationKind::NonFinite, std::string(name) + " has non-finite entries"});
        }
}

void check_spd(ValidationReport& report, const char* name, const Matrix& m)
{
        if (!m.is_square() || !m.all_finite())
        {
                return;
        }
        try
        {
                (void)cholesky_lower(m);
        }
        catch (const LinalgError& e)
        {
                if (e.kind() == LinalgErrorKind::NotSymmetric)
                {
                        report.push_back({ViolationKind::NotSymmetric, std::string(name) + " not symmetric"});
                }
                else
                {
                        report.push_back(
                                {ViolationKind::NotPositiveDefinite, std::string(name) + " not positive definite"});
                }
        }
}
} // namespace

StateSpaceModel::StateSpaceModel(SystemMatrices constant)
        : n_(constant.F.rows()),
          q_(constant.G.cols()),
          m_(constant.H.rows()),
          constant_(std::move(constant))
{
}

StateSpaceModel::StateSpaceModel(std::size_t n, std::size_t q, std::size_t m, Provider provider)
        : n_(n),
          q_(q),
          m_(m),
          provider_(std::move(provider))
{
        if (!provider_)
        {
                throw std::invalid_argument("StateSpaceModel: empty provider");
        }
}

SystemMatrices StateSpaceModel::at(std::size_t step) const
{
        return constant_ ? *constant_ : provider_(step);
}

const SystemMatrices& StateSpaceModel::constant() const
{
        if (!constant_)
        {
                throw std::logic_error("StateSpaceModel: model is time-varying");
        }
        return *constant_;
}

ValidationReport validate_model(const StateSpaceModel& model, const InitialCondition& init, bool require_spd_init)
{
        ValidationReport report;
        const std::size_t n = model.state_dim();
        const std::size_t q = model.noise_dim();
        const std::size_t m = model.measurement_dim();
        if (n == 0 || q == 0 || m == 0)
        {
                report.push_back({ViolationKind::Dimension, "model dimensions must be positive"});
                return report;
        }

        const SystemMatrices s = model.at(0);
        check_shape(report, "F", s.F, n, n);
        check_shape(report, "G", s.G, n, q);
        check_shape(report, "H", s.H, m, n);
        check_shape(report, "Q", s.Q, q, q);
        check_shape(report, "R", s.R, m, m);
        check_shape(report, "initial mean", init.mean, n, 1);
        check_shape(report, "initial covariance", init.covariance, n, n);

        check_spd(report, "Q", s.Q);
        check_spd(report, "R", s.R);

        const Matrix& pi0 = init.covariance;
        if (pi0.rows() == n && pi0.cols() == n && pi0.all_finite())
        {
                if (require_spd_init)
                {
                        check_spd(report, "initial covariance", pi0);
                }
                else
                {
                        try
                        {
                                (void)cholesky_lower_semidefinite(pi0);
                        }
                        catch (const LinalgError&)
                        {
                                report.push_back({ViolationKind::NotSymmetric, "initial covariance not symmetric"});
                        }
                }
        }
        return report;
}

std::string format_report(const ValidationReport& report)
{
        std::ostringstream oss;
        for (std::size_t i = 0; i < report.size(); ++i)
        {
                oss << (i == 0 ? "" : "; ") << report[i].message;
        }
        return oss.str();
}

} // namespace mcckf
