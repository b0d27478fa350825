#pragma once

#include "linalg.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mcckf
{

/// F, G, H, Q, R of x_k = F x_{k-1} + G w_{k-1}, y_k = H x_k + v_k at one step.
struct SystemMatrices
{
        Matrix F;
        Matrix G;
        Matrix H;
        Matrix Q;
        Matrix R;
};

/// Linear state-space model, either time-invariant or backed by a
/// deterministic step-indexed provider.
class StateSpaceModel
{
public:
        using Provider = std::function<SystemMatrices(std::size_t step)>;

        explicit StateSpaceModel(SystemMatrices constant);
        StateSpaceModel(std::size_t n, std::size_t q, std::size_t m, Provider provider);

        std::size_t state_dim() const noexcept
        {
                return n_;
        }
        std::size_t noise_dim() const noexcept
        {
                return q_;
        }
        std::size_t measurement_dim() const noexcept
        {
                return m_;
        }

        bool time_invariant() const noexcept
        {
                return constant_.has_value();
        }

        SystemMatrices at(std::size_t step) const;

        /// Only valid for time-invariant models.
        const SystemMatrices& constant() const;

private:
        std::size_t n_;
        std::size_t q_;
        std::size_t m_;
        std::optional<SystemMatrices> constant_;
        Provider provider_;
};

struct InitialCondition
{
        Vector mean;
        Matrix covariance;
};

struct Measurement
{
        std::size_t step;
        Vector value;
};

enum class ViolationKind
{
        Dimension,
        NotSymmetric,
        NotPositiveDefinite,
        NonFinite,
};

struct Violation
{
        ViolationKind kind;
        std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Checks dimensions, symmetry and definiteness of Q, R and (optionally) Pi_0.
/// For provider-backed models only step 0 is inspected.
ValidationReport validate_model(const StateSpaceModel& model, const InitialCondition& init, bool require_spd_init);

std::string format_report(const ValidationReport& report);

} // namespace mcckf
