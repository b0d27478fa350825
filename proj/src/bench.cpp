#include "mcckf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <system_error>
#include <thread>

namespace mcckf
{
namespace
{
constexpr double NaN = std::numeric_limits<double>::quiet_NaN();

struct RunOutput
{
        std::vector<Vector> estimates;
        RunStatus status;
};

std::ofstream open_for_write(const std::filesystem::path& path)
{
        std::ofstream out(path);
        if (!out)
        {
                throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
        }
        out << std::setprecision(17);
        return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path)
{
        out.flush();
        if (!out)
        {
                throw std::system_error(errno, std::generic_category(), "write failed for " + path.string());
        }
}

Matrix selector(std::size_t n, std::initializer_list<std::size_t> components)
{
        Matrix g(n, components.size());
        std::size_t col = 0;
        for (std::size_t c : components)
        {
                g(c, col++) = 1;
        }
        return g;
}

void check_grid(std::span<const double> grid)
{
        if (grid.empty())
        {
                throw std::invalid_argument("delta grid is empty");
        }
        for (std::size_t i = 0; i < grid.size(); ++i)
        {
                if (!(grid[i] > 0) || !std::isfinite(grid[i]))
                {
                        throw std::invalid_argument("delta grid entries must be positive");
                }
                if (i > 0 && !(grid[i] < grid[i - 1]))
                {
                        throw std::invalid_argument("delta grid must be strictly decreasing");
                }
        }
}
} // namespace

Matrix radar_transition(double rho, double T)
{
        Matrix F = Matrix::identity(6);
        for (std::size_t b : {0u, 3u})
        {
                F(b, b + 1) = T;
                F(b + 1, b + 2) = 1;
                F(b + 2, b + 2) = rho;
        }
        return F;
}

Scenario build_example1(const Example1Constants& c, const ShotNoiseSpec& shot)
{
        SystemMatrices sys;
        sys.F = radar_transition(c.rho, c.T);
        sys.G = selector(6, {2, 5});
        sys.H = Matrix::zeros(2, 6);
        sys.H(0, 0) = 1;
        sys.H(1, 3) = 1;
        sys.Q = Matrix{{c.sigma1_2, 0}, {0, c.sigma2_2}};
        sys.R = Matrix{{c.sigma_r2, 0}, {0, c.sigma_theta2}};

        const double bearing = c.pi0_bearing_scale.value_or(std::sqrt(c.sigma_theta2));
        const double rate_noise = c.pi0_bearing_rate_noise.value_or(c.sigma1_2);
        const double T = c.T;
        Matrix pi0(6, 6);
        pi0(0, 0) = c.sigma_r2;
        pi0(0, 1) = pi0(1, 0) = c.sigma_r2 / T;
        pi0(1, 1) = 2 * c.sigma_r2 / (T * T) + c.sigma1_2;
        pi0(2, 2) = c.sigma1_2;
        pi0(3, 3) = bearing;
        pi0(3, 4) = pi0(4, 3) = bearing / T;
        pi0(4, 4) = 2 * bearing / (T * T) + rate_noise;
        pi0(5, 5) = c.sigma2_2;

        return {StateSpaceModel(std::move(sys)), {Matrix(6, 1), std::move(pi0)}, shot, c.horizon};
}

Scenario build_example2(double delta, const Example1Constants& c)
{
        if (!(delta > 0))
        {
                throw std::invalid_argument("delta must be positive");
        }
        SystemMatrices sys;
        sys.F = radar_transition(c.rho, c.T);
        sys.G = selector(6, {2, 5});
        sys.H = Matrix(2, 6, 1.0);
        sys.H(1, 5) = 1 + delta;
        sys.Q = Matrix{{c.sigma1_2, 0}, {0, c.sigma2_2}};
        sys.R = Matrix{{delta * delta, 0}, {0, delta * delta}};
        return {StateSpaceModel(std::move(sys)), {Matrix(6, 1), Matrix::identity(6)}, std::nullopt, c.horizon};
}

//

RmseAccumulator::RmseAccumulator(Algorithm algorithm, std::size_t horizon, std::size_t dim)
        : algorithm_(algorithm),
          horizon_(horizon),
          dim_(dim),
          squared_(horizon * dim, 0.0)
{
}

void RmseAccumulator::add_run(
        std::span<const Vector> truth,
        std::span<const Vector> estimates,
        const RunStatus& status)
{
        statuses_.push_back(status);
        if (!status.completed)
        {
                return;
        }
        if (truth.size() != horizon_ || estimates.size() != horizon_)
        {
                throw std::invalid_argument("RMSE accumulation: run length does not match horizon");
        }
        for (std::size_t k = 0; k < horizon_; ++k)
        {
                for (std::size_t i = 0; i < dim_; ++i)
                {
                        const double e = truth[k][i] - estimates[k][i];
                        squared_[k * dim_ + i] += e * e;
                }
        }
        ++used_;
}

RmseReport RmseAccumulator::finish() const
{
        RmseReport r;
        r.algorithm = algorithm_;
        r.runs = statuses_.size();
        r.diverged_runs = r.runs - used_;
        r.run_statuses = statuses_;
        r.per_component.assign(horizon_, std::vector<double>(dim_, NaN));
        r.total.assign(horizon_, NaN);
        if (used_ == 0)
        {
                r.scalar_summary = NaN;
                return r;
        }
        double sum = 0;
        for (std::size_t k = 0; k < horizon_; ++k)
        {
                double total = 0;
                for (std::size_t i = 0; i < dim_; ++i)
                {
                        const double mse = squared_[k * dim_ + i] / static_cast<double>(used_);
                        r.per_component[k][i] = std::sqrt(mse);
                        total += mse;
                }
                r.total[k] = std::sqrt(total);
                sum += r.total[k];
        }
        r.scalar_summary = horizon_ == 0 ? 0 : sum / static_cast<double>(horizon_);
        return r;
}

std::vector<Vector> filtered_estimates(const FilterRun& run)
{
        std::vector<Vector> out;
        out.reserve(run.steps.size());
        for (const StepResult& s : run.steps)
        {
                out.push_back(s.state.estimate);
        }
        return out;
}

std::vector<RmseReport> run_monte_carlo(
        std::span<const Algorithm> algorithms,
        const Scenario& scenario,
        std::size_t runs,
        std::uint64_t master_seed,
        const WeightRule& rule)
{
        if (runs == 0)
        {
                throw std::invalid_argument("Monte Carlo run count must be at least 1");
        }
        const std::size_t n = scenario.model.state_dim();

        std::vector<std::vector<Vector>> truths(runs);
        std::vector<std::vector<RunOutput>> outputs(runs, std::vector<RunOutput>(algorithms.size()));

        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        const auto worker = [&]
        {
                for (std::size_t run = next++; run < runs; run = next++)
                {
                        try
                        {
                                const Trajectory t = simulate(
                                        scenario.model, scenario.init, scenario.horizon, {master_seed, run},
                                        scenario.shot);
                                for (std::size_t a = 0; a < algorithms.size(); ++a)
                                {
                                        const FilterRun fr =
                                                run_filter(algorithms[a], scenario.model, scenario.init, t.measurements, rule);
                                        outputs[run][a] = {filtered_estimates(fr), fr.status};
                                }
                                truths[run] = t.truth;
                        }
                        catch (...)
                        {
                                const std::lock_guard lock(failure_mutex);
                                if (!failure)
                                {
                                        failure = std::current_exception();
                                }
                        }
                }
        };

        const std::size_t threads =
                std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::min<std::size_t>(runs, 16));
        {
                std::vector<std::jthread> pool;
                for (std::size_t i = 1; i < threads; ++i)
                {
                        pool.emplace_back(worker);
                }
                worker();
        }
        if (failure)
        {
                std::rethrow_exception(failure);
        }

        std::vector<RmseReport> reports;
        for (std::size_t a = 0; a < algorithms.size(); ++a)
        {
                RmseAccumulator acc(algorithms[a], scenario.horizon, n);
                for (std::size_t run = 0; run < runs; ++run)
                {
                        acc.add_run(truths[run], outputs[run][a].estimates, outputs[run][a].status);
                }
                reports.push_back(acc.finish());
        }
        return reports;
}

//

std::optional<double> SweepReport::breakdown_of(Algorithm algorithm) const
{
        for (std::size_t a = 0; a < algorithms.size(); ++a)
        {
                if (algorithms[a] == algorithm)
                {
                        return breakdown_delta[a];
                }
        }
        return std::nullopt;
}

std::vector<double> default_delta_grid()
{
        std::vector<double> grid;
        for (int e = 1; e <= 14; ++e)
        {
                grid.push_back(std::pow(10.0, -e));
        }
        return grid;
}

SweepReport run_conditioning_sweep(
        std::span<const Algorithm> algorithms,
        std::span<const double> delta_grid,
        std::size_t runs,
        std::uint64_t master_seed,
        const WeightRule& rule,
        const Example1Constants& constants,
        double blowup_factor)
{
        check_grid(delta_grid);

        SweepReport report;
        report.delta_grid.assign(delta_grid.begin(), delta_grid.end());
        report.algorithms.assign(algorithms.begin(), algorithms.end());
        report.blowup_factor = blowup_factor;
        report.breakdown_delta.assign(algorithms.size(), std::nullopt);

        const auto evaluate = [&](double delta)
        { return run_monte_carlo(algorithms, build_example2(delta, constants), runs, master_seed, rule); };

        std::vector<std::vector<RmseReport>> per_delta;
        per_delta.reserve(delta_grid.size());
        std::optional<std::size_t> baseline_index;
        for (std::size_t d = 0; d < delta_grid.size(); ++d)
        {
                per_delta.push_back(evaluate(delta_grid[d]));
                if (delta_grid[d] == SWEEP_BASELINE_DELTA)
                {
                        baseline_index = d;
                }
        }
        const std::vector<RmseReport> baseline =
                baseline_index ? per_delta[*baseline_index] : evaluate(SWEEP_BASELINE_DELTA);
        for (const RmseReport& r : baseline)
        {
                report.baseline.push_back(r.diverged_runs == 0 ? r.scalar_summary : NaN);
        }

        for (std::size_t d = 0; d < delta_grid.size(); ++d)
        {
                for (std::size_t a = 0; a < algorithms.size(); ++a)
                {
                        const RmseReport& r = per_delta[d][a];
                        const double limit = blowup_factor * report.baseline[a];
                        const bool blown = r.diverged_runs > 0 || !std::isfinite(r.scalar_summary)
                                           || !(r.scalar_summary <= limit);
                        report.cells.push_back({delta_grid[d], algorithms[a], r.scalar_summary, r.diverged_runs, blown});
                        if (blown && !report.breakdown_delta[a])
                        {
                                report.breakdown_delta[a] = delta_grid[d];
                        }
                }
        }
        return report;
}

bool sr1b_breaks_last(const SweepReport& report)
{
        const std::optional<double> sr1b = report.breakdown_of(Algorithm::SquareRoot1b);
        if (!sr1b)
        {
                return true;
        }
        for (std::size_t a = 0; a < report.algorithms.size(); ++a)
        {
                if (report.algorithms[a] == Algorithm::SquareRoot1b)
                {
                        continue;
                }
                const std::optional<double>& other = report.breakdown_delta[a];
                if (!other || !(*sr1b < *other))
                {
                        return false;
                }
        }
        return true;
}

//

void write_csv(const RmseReport& report, const std::filesystem::path& path)
{
        std::ofstream out = open_for_write(path);
        const std::size_t n = report.per_component.empty() ? 0 : report.per_component.front().size();
        out << "step";
        for (std::size_t i = 1; i <= n; ++i)
        {
                out << ",rmse_x" << i;
        }
        out << ",total\n";
        for (std::size_t k = 0; k < report.total.size(); ++k)
        {
                out << (k + 1);
                for (double v : report.per_component[k])
                {
                        out << ',' << v;
                }
                out << ',' << report.total[k] << '\n';
        }
        finish_write(out, path);
}

void write_csv(const SweepReport& report, const std::filesystem::path& path)
{
        std::ofstream out = open_for_write(path);
        out << "delta,algorithm,scalar_rmse,status,breakdown_flag\n";
        for (const SweepCell& c : report.cells)
        {
                const std::optional<double> breakdown = report.breakdown_of(c.algorithm);
                const char* status = c.diverged_runs > 0 ? "diverged" : (c.blown_up ? "blown_up" : "ok");
                out << c.delta << ',' << to_string(c.algorithm) << ',' << c.scalar_rmse << ',' << status << ','
                    << (breakdown && *breakdown == c.delta ? 1 : 0) << '\n';
        }
        finish_write(out, path);
}

} // namespace mcckf
