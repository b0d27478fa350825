#pragma once

#include "linalg.hpp"
#include "model.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

namespace mcckf
{

struct SeedSpec
{
        std::uint64_t master_seed = 0;
        std::uint64_t run_index = 0;
};

/// Reproducible random stream. Each (master seed, run index, substream) triple
/// is mixed through SplitMix64 into an independent Mersenne Twister seed.
class RandomStream
{
public:
        RandomStream(const SeedSpec& seed, std::uint64_t substream);

        double normal();
        std::int64_t uniform_int(std::int64_t low, std::int64_t high);

        std::mt19937_64& engine() noexcept
        {
                return engine_;
        }

private:
        std::mt19937_64 engine_;
        std::normal_distribution<double> normal_;
};

enum class NoiseGroup
{
        Process,
        Measurement,
};

struct ShotTargets
{
        bool process = true;
        bool measurement = true;
};

/// Impulsive outliers added to the Gaussian noise samples.
struct ShotNoiseSpec
{
        double corrupted_fraction = 0.20;
        std::int64_t magnitude_low = 0;
        std::int64_t magnitude_high = 5;
        // Inclusive step interval eligible for corruption.
        std::size_t window_begin = 21;
        std::size_t window_end = 300;
        ShotTargets targets;
        // When set, each impulse gets a random sign; otherwise impulses are positive.
        bool random_sign = false;

        std::size_t window_length() const noexcept
        {
                return window_end - window_begin + 1;
        }
        std::size_t corrupted_steps() const;
};

struct Outlier
{
        std::size_t step;
        NoiseGroup group;
        std::size_t channel;
        double magnitude;
};

struct Trajectory
{
        std::size_t horizon = 0;
        Vector initial_state;
        // truth[k - 1] is x_k, k = 1..horizon
        std::vector<Vector> truth;
        std::vector<Measurement> measurements;
        std::vector<Outlier> outlier_log;
};

/// mean + factor * z with z standard normal.
Vector draw_gaussian(RandomStream& stream, const Vector& mean, const LowerTriangular& covariance_factor);

/// Forward simulation of the model over steps 1..horizon. The process noise
/// w_{k-1} entering x_k and the measurement noise v_k are both indexed by k for
/// outlier placement. Gaussian noise and the outlier schedule come from
/// separate substreams, so a zero corruption fraction leaves the noise
/// sequence untouched.
Trajectory simulate(
        const StateSpaceModel& model,
        const InitialCondition& init,
        std::size_t horizon,
        const SeedSpec& seed,
        const std::optional<ShotNoiseSpec>& shot);

/// Columns: step, x1..xn, y1..ym, w_outlier, v_outlier.
void write_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path);

} // namespace mcckf
