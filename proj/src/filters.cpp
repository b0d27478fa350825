#include "mcckf/filters.hpp"

#include <cmath>
#include <sstream>

namespace mcckf
{
namespace
{
const LowerTriangular& factor_of(const FilterState& state)
{
        const auto* f = std::get_if<CholeskyFactor>(&state.covariance);
        if (f == nullptr)
        {
                throw std::invalid_argument("square-root step requires a Cholesky factor state");
        }
        return f->S;
}

const Matrix& full_of(const FilterState& state)
{
        const auto* f = std::get_if<FullCovariance>(&state.covariance);
        if (f == nullptr)
        {
                throw std::invalid_argument("conventional step requires a full covariance state");
        }
        return f->P;
}

void check_estimate(const Vector& x, std::size_t step)
{
        for (std::size_t i = 0; i < x.rows(); ++i)
        {
                if (!std::isfinite(x[i]) || std::abs(x[i]) > DIVERGENCE_THRESHOLD)
                {
                        std::ostringstream oss;
                        oss << "step " << step << ": estimate component " << i << " = " << x[i];
                        throw Diverged(oss.str());
                }
        }
}

void check_finite(const Matrix& m, std::size_t step, const char* what)
{
        if (!m.all_finite())
        {
                std::ostringstream oss;
                oss << "step " << step << ": non-finite " << what;
                throw Diverged(oss.str());
        }
}

Diverged wrap(const std::exception& e, std::size_t step)
{
        std::ostringstream oss;
        oss << "step " << step << ": " << e.what();
        return Diverged(oss.str());
}

Vector innovation_of(const Matrix& H, const Vector& predicted, const Measurement& y)
{
        if (y.value.rows() != H.rows() || y.value.cols() != 1)
        {
                throw std::invalid_argument("measurement dimension does not match H");
        }
        return y.value - H * predicted;
}

/// H^T R^-1 via the Cholesky factor of R.
Matrix weighted_measurement_transpose(const Matrix& H, const LowerTriangular& r_sqrt)
{
        return triangular_solve(r_sqrt, triangular_solve(r_sqrt, H), true).transposed();
}

/// [(I - K H) S, K R^{1/2}] -> factor of the Joseph-form covariance.
LowerTriangular joseph_factor(
        const Matrix& K,
        const Matrix& H,
        const LowerTriangular& predicted,
        const LowerTriangular& r_sqrt)
{
        const std::size_t n = predicted.dim();
        const std::size_t m = r_sqrt.dim();
        const Matrix I_KH = Matrix::identity(n) - K * H;
        Matrix pre(n, n + m);
        pre.set_block(0, 0, I_KH * predicted.matrix());
        pre.set_block(0, n, K * r_sqrt.matrix());
        return lower_triangularize(pre);
}

Matrix joseph_covariance(const Matrix& K, const Matrix& H, const Matrix& P, const Matrix& R)
{
        const Matrix I_KH = Matrix::identity(P.rows()) - K * H;
        return symmetrized(I_KH * P * I_KH.transposed() + K * R * K.transposed());
}

Matrix zero_residual(std::size_t n)
{
        return Matrix(n, 1);
}
} // namespace

std::string_view to_string(Algorithm algorithm)
{
        switch (algorithm)
        {
        case Algorithm::Conventional:
                return "conventional";
        case Algorithm::SquareRoot1a:
                return "sr1a";
        case Algorithm::SquareRoot1b:
                return "sr1b";
        case Algorithm::KfReference:
                return "kf_reference";
        }
        return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name)
{
        for (Algorithm a :
             {Algorithm::Conventional, Algorithm::SquareRoot1a, Algorithm::SquareRoot1b, Algorithm::KfReference})
        {
                if (to_string(a) == name)
                {
                        return a;
                }
        }
        return std::nullopt;
}

Matrix FilterState::covariance_matrix() const
{
        if (const auto* f = std::get_if<FullCovariance>(&covariance))
        {
                return f->P;
        }
        return std::get<CholeskyFactor>(covariance).S.gram();
}

StepModel StepModel::factor(SystemMatrices sys)
{
        LowerTriangular q = cholesky_lower(sys.Q);
        LowerTriangular r = cholesky_lower(sys.R);
        return {std::move(sys), std::move(q), std::move(r)};
}

double adjusting_weight(
        const WeightRule& rule,
        const Vector& innovation,
        const LowerTriangular& r_sqrt,
        const LowerTriangular& p_sqrt)
{
        if (rule.pinned_lambda)
        {
                return *rule.pinned_lambda;
        }
        return compute_lambda(rule.kernel, {innovation, r_sqrt, zero_residual(p_sqrt.dim()), p_sqrt});
}

Matrix mcc_gain_information_form(const Matrix& P, const Matrix& H, const Matrix& R, double lambda)
{
        const LowerTriangular p_sqrt = cholesky_lower(P);
        const LowerTriangular r_sqrt = cholesky_lower(R);
        const Matrix ht_rinv = weighted_measurement_transpose(H, r_sqrt);
        const std::size_t n = P.rows();
        const Matrix p_inv =
                triangular_solve(p_sqrt, triangular_solve(p_sqrt, Matrix::identity(n)), true);
        const LowerTriangular info_sqrt = cholesky_lower(symmetrized(p_inv + lambda * (ht_rinv * H)));
        return lambda * triangular_solve(info_sqrt, triangular_solve(info_sqrt, ht_rinv), true);
}

Matrix mcc_gain_innovation_form(const Matrix& P, const Matrix& H, const Matrix& R, double lambda)
{
        const Matrix HP = H * P;
        const Matrix Re = symmetrized(lambda * (HP * H.transposed()) + R);
        const LowerTriangular re_sqrt = cholesky_lower(Re);
        return lambda * triangular_solve(re_sqrt, triangular_solve(re_sqrt, HP), true).transposed();
}

//

FilterState mcckf_time_update(const StepModel& model, const FilterState& prior)
{
        const SystemMatrices& s = model.sys;
        const Matrix& P = full_of(prior);
        const std::size_t k = prior.step + 1;

        FilterState out;
        out.step = k;
        out.estimate = s.F * prior.estimate;
        Matrix P_pred = symmetrized(s.F * P * s.F.transposed() + s.G * s.Q * s.G.transposed());
        check_finite(P_pred, k, "predicted covariance");
        check_estimate(out.estimate, k);
        out.covariance = FullCovariance{std::move(P_pred)};
        return out;
}

StepResult mcckf_measurement_update(
        const StepModel& model,
        const FilterState& predicted,
        const Measurement& y,
        const WeightRule& rule)
{
        const SystemMatrices& s = model.sys;
        const Matrix& P = full_of(predicted);
        const std::size_t k = predicted.step;
        const std::size_t n = P.rows();

        StepResult result;
        try
        {
                StepReport& report = result.report;
                report.innovation = innovation_of(s.H, predicted.estimate, y);

                const LowerTriangular p_sqrt = cholesky_lower(P);
                report.lambda = adjusting_weight(rule, report.innovation, model.r_sqrt, p_sqrt);

                // K = lambda (P^-1 + lambda H^T R^-1 H)^-1 H^T R^-1
                const Matrix ht_rinv = weighted_measurement_transpose(s.H, model.r_sqrt);
                const Matrix p_inv =
                        triangular_solve(p_sqrt, triangular_solve(p_sqrt, Matrix::identity(n)), true);
                const Matrix information = symmetrized(p_inv + report.lambda * (ht_rinv * s.H));
                const LowerTriangular info_sqrt = cholesky_lower(information);
                report.gain =
                        report.lambda * triangular_solve(info_sqrt, triangular_solve(info_sqrt, ht_rinv), true);
                check_finite(report.gain, k, "gain");

                result.state.step = k;
                result.state.covariance = FullCovariance{joseph_covariance(report.gain, s.H, P, s.R)};
                result.state.estimate = predicted.estimate + report.gain * report.innovation;
        }
        catch (const LinalgError& e)
        {
                throw wrap(e, k);
        }
        catch (const DegenerateWeight& e)
        {
                throw wrap(e, k);
        }
        check_finite(std::get<FullCovariance>(result.state.covariance).P, k, "filtered covariance");
        check_estimate(result.state.estimate, k);
        return result;
}

FilterState sr_time_update(const StepModel& model, const FilterState& prior)
{
        const SystemMatrices& s = model.sys;
        const LowerTriangular& S = factor_of(prior);
        const std::size_t k = prior.step + 1;
        const std::size_t n = S.dim();

        Matrix pre(n, n + s.G.cols());
        pre.set_block(0, 0, s.F * S.matrix());
        pre.set_block(0, n, s.G * model.q_sqrt.matrix());

        FilterState out;
        out.step = k;
        out.estimate = s.F * prior.estimate;
        try
        {
                out.covariance = CholeskyFactor{lower_triangularize(pre)};
        }
        catch (const LinalgError& e)
        {
                throw wrap(e, k);
        }
        check_estimate(out.estimate, k);
        return out;
}

StepResult sr1a_measurement_update(
        const StepModel& model,
        const FilterState& predicted,
        const Measurement& y,
        const WeightRule& rule)
{
        const SystemMatrices& s = model.sys;
        const LowerTriangular& S = factor_of(predicted);
        const std::size_t k = predicted.step;
        const std::size_t n = S.dim();
        const std::size_t m = s.H.rows();

        StepResult result;
        try
        {
                StepReport& report = result.report;
                report.innovation = innovation_of(s.H, predicted.estimate, y);
                report.lambda = adjusting_weight(rule, report.innovation, model.r_sqrt, S);

                // [P^{-T/2}, lambda^{1/2} H^T R^{-T/2}] -> S_info with S_info S_info^T = P^-1 + lambda H^T R^-1 H
                const Matrix p_inv_t = triangular_inverse(S).matrix().transposed();
                const Matrix r_inv_t = triangular_inverse(model.r_sqrt).matrix().transposed();
                Matrix pre(n, n + m);
                pre.set_block(0, 0, p_inv_t);
                pre.set_block(0, n, std::sqrt(report.lambda) * (s.H.transposed() * r_inv_t));
                const LowerTriangular info_sqrt = lower_triangularize(pre);

                const Matrix ht_rinv = weighted_measurement_transpose(s.H, model.r_sqrt);
                report.gain =
                        report.lambda * triangular_solve(info_sqrt, triangular_solve(info_sqrt, ht_rinv), true);
                check_finite(report.gain, k, "gain");

                result.state.step = k;
                result.state.estimate = predicted.estimate + report.gain * report.innovation;
                result.state.covariance = CholeskyFactor{joseph_factor(report.gain, s.H, S, model.r_sqrt)};
        }
        catch (const LinalgError& e)
        {
                throw wrap(e, k);
        }
        catch (const DegenerateWeight& e)
        {
                throw wrap(e, k);
        }
        check_estimate(result.state.estimate, k);
        return result;
}

StepResult sr1b_measurement_update(
        const StepModel& model,
        const FilterState& predicted,
        const Measurement& y,
        const WeightRule& rule)
{
        const SystemMatrices& s = model.sys;
        const LowerTriangular& S = factor_of(predicted);
        const std::size_t k = predicted.step;
        const std::size_t n = S.dim();
        const std::size_t m = s.H.rows();

        StepResult result;
        try
        {
                StepReport& report = result.report;
                report.innovation = innovation_of(s.H, predicted.estimate, y);
                report.lambda = adjusting_weight(rule, report.innovation, model.r_sqrt, S);

                // [lambda^{1/2} H P^{1/2}, R^{1/2}] -> R_e^{1/2}
                Matrix pre(m, n + m);
                pre.set_block(0, 0, std::sqrt(report.lambda) * (s.H * S.matrix()));
                pre.set_block(0, n, model.r_sqrt.matrix());
                const LowerTriangular re_sqrt = lower_triangularize(pre);

                // K^T = lambda R_e^{-T/2} R_e^{-1/2} H P
                const Matrix HP = s.H * S.gram();
                report.gain =
                        report.lambda * triangular_solve(re_sqrt, triangular_solve(re_sqrt, HP), true).transposed();
                check_finite(report.gain, k, "gain");

                result.state.step = k;
                result.state.estimate = predicted.estimate + report.gain * report.innovation;
                result.state.covariance = CholeskyFactor{joseph_factor(report.gain, s.H, S, model.r_sqrt)};
        }
        catch (const LinalgError& e)
        {
                throw wrap(e, k);
        }
        catch (const DegenerateWeight& e)
        {
                throw wrap(e, k);
        }
        check_estimate(result.state.estimate, k);
        return result;
}

StepResult kf_reference_step(
        const StepModel& previous,
        const StepModel& current,
        const FilterState& prior,
        const Measurement& y)
{
        const FilterState predicted = mcckf_time_update(previous, prior);
        const SystemMatrices& s = current.sys;
        const Matrix& P = full_of(predicted);
        const std::size_t k = predicted.step;

        StepResult result;
        StepReport& report = result.report;
        report.lambda = 1;
        report.innovation = innovation_of(s.H, predicted.estimate, y);
        try
        {
                const Matrix HP = s.H * P;
                const Matrix Re = HP * s.H.transposed() + s.R;
                report.gain = lu_solve(Re, HP).transposed();
        }
        catch (const LinalgError& e)
        {
                throw wrap(e, k);
        }
        check_finite(report.gain, k, "gain");
        result.state.step = k;
        result.state.estimate = predicted.estimate + report.gain * report.innovation;
        result.state.covariance = FullCovariance{joseph_covariance(report.gain, s.H, P, s.R)};
        check_finite(std::get<FullCovariance>(result.state.covariance).P, k, "filtered covariance");
        check_estimate(result.state.estimate, k);
        return result;
}

//

FilterRun run_filter(
        Algorithm algorithm,
        const StateSpaceModel& model,
        const InitialCondition& init,
        std::span<const Measurement> measurements,
        const WeightRule& rule)
{
        FilterRun run;
        run.algorithm = algorithm;
        run.initial.step = 0;
        run.initial.estimate = init.mean;

        const bool square_root = algorithm == Algorithm::SquareRoot1a || algorithm == Algorithm::SquareRoot1b;
        try
        {
                if (square_root)
                {
                        run.initial.covariance = CholeskyFactor{cholesky_lower(init.covariance)};
                }
                else
                {
                        run.initial.covariance = FullCovariance{symmetrized(init.covariance)};
                }
        }
        catch (const LinalgError& e)
        {
                run.status = {false, 0, std::string("initial covariance: ") + e.what()};
                return run;
        }

        std::optional<StepModel> constant;
        const auto step_model = [&](std::size_t step) -> StepModel
        {
                if (constant)
                {
                        return *constant;
                }
                return StepModel::factor(model.at(step));
        };

        run.steps.reserve(measurements.size());
        const FilterState* prior = &run.initial;
        for (const Measurement& y : measurements)
        {
                const std::size_t k = prior->step + 1;
                try
                {
                        if (y.step != k)
                        {
                                throw std::invalid_argument("measurements must be consecutive from step 1");
                        }
                        if (!constant && model.time_invariant())
                        {
                                constant = StepModel::factor(model.constant());
                        }
                        const StepModel previous = step_model(k - 1);
                        const StepModel current = step_model(k);
                        switch (algorithm)
                        {
                        case Algorithm::Conventional:
                                run.steps.push_back(
                                        mcckf_measurement_update(current, mcckf_time_update(previous, *prior), y, rule));
                                break;
                        case Algorithm::SquareRoot1a:
                                run.steps.push_back(
                                        sr1a_measurement_update(current, sr_time_update(previous, *prior), y, rule));
                                break;
                        case Algorithm::SquareRoot1b:
                                run.steps.push_back(
                                        sr1b_measurement_update(current, sr_time_update(previous, *prior), y, rule));
                                break;
                        case Algorithm::KfReference:
                                run.steps.push_back(kf_reference_step(previous, current, *prior, y));
                                break;
                        }
                }
                catch (const Diverged& e)
                {
                        run.status = {false, k, e.what()};
                        return run;
                }
                catch (const LinalgError& e)
                {
                        run.status = {false, k, e.what()};
                        return run;
                }
                prior = &run.steps.back().state;
        }
        return run;
}

} // namespace mcckf
