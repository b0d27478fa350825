#pragma once

#include "correntropy.hpp"
#include "linalg.hpp"
#include "model.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mcckf
{

enum class Algorithm
{
        Conventional,
        SquareRoot1a,
        SquareRoot1b,
        KfReference,
};

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);

inline constexpr Algorithm MCC_ALGORITHMS[] = {
        Algorithm::Conventional,
        Algorithm::SquareRoot1a,
        Algorithm::SquareRoot1b,
};

/// Estimates with any component above this magnitude count as diverged.
inline constexpr double DIVERGENCE_THRESHOLD = 1e12;

class Diverged : public std::runtime_error
{
public:
        using std::runtime_error::runtime_error;
};

struct FullCovariance
{
        Matrix P;
};

struct CholeskyFactor
{
        LowerTriangular S;
};

struct FilterState
{
        std::size_t step = 0;
        Vector estimate;
        std::variant<FullCovariance, CholeskyFactor> covariance;

        /// P, reconstructed as S S^T for factor-form states.
        Matrix covariance_matrix() const;
};

struct StepReport
{
        double lambda = 1;
        Matrix gain;
        Vector innovation;
};

struct StepResult
{
        FilterState state;
        StepReport report;
};

/// How lambda_k is obtained. A pinned value bypasses the kernel entirely and
/// is used to reduce the filters to the classical KF (1) or to pure
/// prediction (0).
struct WeightRule
{
        KernelSpec kernel{1.0};
        std::optional<double> pinned_lambda;

        static WeightRule kernel_only(double sigma)
        {
                return {KernelSpec(sigma), std::nullopt};
        }
        static WeightRule pinned(double lambda)
        {
                return {KernelSpec(1.0), lambda};
        }
};

/// System matrices at one step together with the Cholesky factors of Q and R.
struct StepModel
{
        SystemMatrices sys;
        LowerTriangular q_sqrt;
        LowerTriangular r_sqrt;

        /// Throws LinalgError when Q or R is not positive definite.
        static StepModel factor(SystemMatrices sys);
};

/// Shared lambda evaluation: zero prediction residual, R-weighted innovation.
double adjusting_weight(
        const WeightRule& rule,
        const Vector& innovation,
        const LowerTriangular& r_sqrt,
        const LowerTriangular& p_sqrt);

// Dense gain formulas, exposed for the equivalence checks.

/// lambda (P^-1 + lambda H^T R^-1 H)^-1 H^T R^-1
Matrix mcc_gain_information_form(const Matrix& P, const Matrix& H, const Matrix& R, double lambda);

/// lambda P H^T (lambda H P H^T + R)^-1
Matrix mcc_gain_innovation_form(const Matrix& P, const Matrix& H, const Matrix& R, double lambda);

// Conventional MCC-KF with the Joseph stabilized covariance update.

FilterState mcckf_time_update(const StepModel& model, const FilterState& prior);

StepResult mcckf_measurement_update(
        const StepModel& model,
        const FilterState& predicted,
        const Measurement& y,
        const WeightRule& rule);

// Square-root forms propagating lower Cholesky factors.

FilterState sr_time_update(const StepModel& model, const FilterState& prior);

/// Information-form gain: inverts the predicted factor.
StepResult sr1a_measurement_update(
        const StepModel& model,
        const FilterState& predicted,
        const Measurement& y,
        const WeightRule& rule);

/// Innovation-form gain: inverts only the m x m factor of R_e.
StepResult sr1b_measurement_update(
        const StepModel& model,
        const FilterState& predicted,
        const Measurement& y,
        const WeightRule& rule);

/// Textbook Kalman filter step (time + measurement update), dense, Joseph form.
StepResult kf_reference_step(
        const StepModel& previous,
        const StepModel& current,
        const FilterState& prior,
        const Measurement& y);

struct RunStatus
{
        bool completed = true;
        std::size_t failed_step = 0;
        std::string reason;
};

struct FilterRun
{
        Algorithm algorithm;
        FilterState initial;
        std::vector<StepResult> steps;
        RunStatus status;
};

/// Runs k = 1..N over consecutive measurements, stopping at the first
/// divergence. The failure is recorded in the status, never thrown.
FilterRun run_filter(
        Algorithm algorithm,
        const StateSpaceModel& model,
        const InitialCondition& init,
        std::span<const Measurement> measurements,
        const WeightRule& rule);

} // namespace mcckf
