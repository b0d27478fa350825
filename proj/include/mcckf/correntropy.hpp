#pragma once

#include "linalg.hpp"

#include <stdexcept>

namespace mcckf
{

/// Gaussian kernel bandwidth.
class KernelSpec
{
public:
        explicit KernelSpec(double sigma);

        double sigma() const noexcept
        {
                return sigma_;
        }

private:
        double sigma_;
};

struct LambdaInputs
{
        Vector innovation;
        LowerTriangular innovation_weight_factor;
        Vector prediction_residual;
        LowerTriangular prediction_weight_factor;
};

class DegenerateWeight : public std::runtime_error
{
public:
        using std::runtime_error::runtime_error;
};

/// exp(-d^2 / (2 sigma^2)); may underflow to 0.
double gaussian_kernel(const KernelSpec& spec, double distance);

/// sqrt(e^T W^-1 e) with W = L L^T, evaluated as ||L^-1 e||. A zero residual
/// returns 0 without touching the factor.
double weighted_norm(const Vector& residual, const LowerTriangular& weight_factor);

/// Scalar adjusting weight: kernel of the R-weighted innovation norm over
/// kernel of the P-weighted prediction residual norm.
double compute_lambda(const KernelSpec& spec, const LambdaInputs& inputs);

} // namespace mcckf
