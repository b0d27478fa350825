#pragma once

#include "filters.hpp"
#include "model.hpp"
#include "sim.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace mcckf
{

/// Radar tracking constants. The state is [range, range rate, maneuver noise,
/// bearing, bearing rate, maneuver noise].
struct Example1Constants
{
        double rho = 0.5;
        double T = 10;
        double sigma_r2 = 1000.0 * 1000.0;
        double sigma_theta2 = 0.017 * 0.017;
        double sigma1_2 = (103.0 / 3.0) * (103.0 / 3.0);
        double sigma2_2 = 1.3e-8;
        std::size_t horizon = 300;
        std::size_t runs = 100;

        // The initial covariance bearing block is built from sigma_theta (not
        // its square) and its (5,5) entry adds sigma1^2. These overrides
        // replace the respective terms when set.
        std::optional<double> pi0_bearing_scale;
        std::optional<double> pi0_bearing_rate_noise;
};

struct Scenario
{
        StateSpaceModel model;
        InitialCondition init;
        std::optional<ShotNoiseSpec> shot;
        std::size_t horizon;
};

/// 6x6 transition matrix with sampling period T and maneuver correlation rho.
Matrix radar_transition(double rho, double T);

Scenario build_example1(const Example1Constants& constants = {}, const ShotNoiseSpec& shot = {});

/// Example 1 dynamics observed through two nearly collinear rows of ones,
/// R = delta^2 I, Pi_0 = I, Gaussian noise only.
Scenario build_example2(double delta, const Example1Constants& constants = {});

struct RmseReport
{
        Algorithm algorithm = Algorithm::Conventional;
        // per_component[k - 1][i] = RMSE of component i at step k
        std::vector<std::vector<double>> per_component;
        std::vector<double> total;
        double scalar_summary = 0;
        std::size_t runs = 0;
        std::size_t diverged_runs = 0;
        std::vector<RunStatus> run_statuses;
};

/// Accumulates squared estimation errors over Monte Carlo runs.
class RmseAccumulator
{
public:
        RmseAccumulator(Algorithm algorithm, std::size_t horizon, std::size_t dim);

        /// estimates[k - 1] is the filtered estimate at step k. Diverged runs are
        /// counted but excluded from the averages.
        void add_run(std::span<const Vector> truth, std::span<const Vector> estimates, const RunStatus& status);

        RmseReport finish() const;

private:
        Algorithm algorithm_;
        std::size_t horizon_;
        std::size_t dim_;
        std::vector<double> squared_;
        std::size_t used_ = 0;
        std::vector<RunStatus> statuses_;
};

std::vector<Vector> filtered_estimates(const FilterRun& run);

/// One trajectory per run index from (master_seed, run); every algorithm
/// consumes the same trajectory. Runs execute on worker threads and are
/// reduced in run order.
std::vector<RmseReport> run_monte_carlo(
        std::span<const Algorithm> algorithms,
        const Scenario& scenario,
        std::size_t runs,
        std::uint64_t master_seed,
        const WeightRule& rule);

struct SweepCell
{
        double delta;
        Algorithm algorithm;
        double scalar_rmse;
        std::size_t diverged_runs;
        bool blown_up;
};

struct SweepReport
{
        std::vector<double> delta_grid;
        std::vector<Algorithm> algorithms;
        // Per-algorithm scalar RMSE at delta = 1e-1, the blow-up reference.
        std::vector<double> baseline;
        double blowup_factor = 1e3;
        // Ordered by delta (grid order), then algorithm.
        std::vector<SweepCell> cells;
        // Largest delta at which each algorithm diverged or blew up.
        std::vector<std::optional<double>> breakdown_delta;

        std::optional<double> breakdown_of(Algorithm algorithm) const;
};

inline constexpr double SWEEP_BASELINE_DELTA = 1e-1;

std::vector<double> default_delta_grid();

/// Throws std::invalid_argument unless the grid is nonempty and strictly decreasing.
SweepReport run_conditioning_sweep(
        std::span<const Algorithm> algorithms,
        std::span<const double> delta_grid,
        std::size_t runs,
        std::uint64_t master_seed,
        const WeightRule& rule,
        const Example1Constants& constants = {},
        double blowup_factor = 1e3);

/// True unless sr1b broke down at a delta at least as large as another
/// algorithm's breakdown (or broke down where another algorithm never did).
bool sr1b_breaks_last(const SweepReport& report);

/// Columns: step, rmse_x1..rmse_xn, total.
void write_csv(const RmseReport& report, const std::filesystem::path& path);

/// Columns: delta, algorithm, scalar_rmse, status, breakdown_flag.
void write_csv(const SweepReport& report, const std::filesystem::path& path);

} // namespace mcckf
