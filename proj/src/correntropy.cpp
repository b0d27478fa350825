#include "mcckf/correntropy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcckf
{

KernelSpec::KernelSpec(double sigma)
        : sigma_(sigma)
{
        if (!(sigma > 0) || !std::isfinite(sigma))
        {
                throw std::invalid_argument("kernel size sigma must be positive and finite");
        }
}

double gaussian_kernel(const KernelSpec& spec, double distance)
{
        if (!(distance >= 0) || !std::isfinite(distance))
        {
                throw std::invalid_argument("kernel distance must be finite and nonnegative");
        }
        const double r = distance / spec.sigma();
        return std::exp(-0.5 * r * r);
}

double weighted_norm(const Vector& residual, const LowerTriangular& weight_factor)
{
        if (std::all_of(residual.data().begin(), residual.data().end(), [](double v) { return v == 0; }))
        {
                return 0;
        }
        return triangular_solve(weight_factor, residual).frobenius_norm();
}

double compute_lambda(const KernelSpec& spec, const LambdaInputs& inputs)
{
        const double numerator = gaussian_kernel(spec, weighted_norm(inputs.innovation, inputs.innovation_weight_factor));
        const double denominator =
                gaussian_kernel(spec, weighted_norm(inputs.prediction_residual, inputs.prediction_weight_factor));
        if (denominator == 0)
        {
                if (numerator == 0)
                {
                        return 0;
                }
                throw DegenerateWeight("adjusting weight denominator underflowed to zero");
        }
        return numerator / denominator;
}

} // namespace mcckf
