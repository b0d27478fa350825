#include "mcckf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <stdexcept>
#include <system_error>

namespace mcckf
{
namespace
{
constexpr std::uint64_t NOISE_SUBSTREAM = 0;
constexpr std::uint64_t SHOT_SUBSTREAM = 1;

std::uint64_t splitmix64(std::uint64_t& state)
{
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
}

std::mt19937_64 make_engine(const SeedSpec& seed, std::uint64_t substream)
{
        std::uint64_t state = seed.master_seed;
        std::uint64_t mixed = splitmix64(state);
        state = mixed ^ seed.run_index;
        mixed = splitmix64(state);
        state = mixed ^ substream;
        std::seed_seq seq{splitmix64(state), splitmix64(state), splitmix64(state), splitmix64(state)};
        return std::mt19937_64(seq);
}

// step -> impulse vector for one noise group
using Schedule = std::map<std::size_t, Vector>;

Schedule draw_schedule(
        RandomStream& stream,
        const ShotNoiseSpec& spec,
        NoiseGroup group,
        std::size_t channels,
        std::vector<Outlier>& log)
{
        std::vector<std::size_t> window(spec.window_length());
        std::iota(window.begin(), window.end(), spec.window_begin);
        std::vector<std::size_t> chosen;
        chosen.reserve(spec.corrupted_steps());
        std::sample(window.begin(), window.end(), std::back_inserter(chosen), spec.corrupted_steps(), stream.engine());

        Schedule schedule;
        for (std::size_t step : chosen)
        {
                Vector impulse(channels, 1);
                for (std::size_t c = 0; c < channels; ++c)
                {
                        double magnitude = static_cast<double>(stream.uniform_int(spec.magnitude_low, spec.magnitude_high));
                        if (spec.random_sign && stream.uniform_int(0, 1) == 0)
                        {
                                magnitude = -magnitude;
                        }
                        impulse[c] = magnitude;
                        log.push_back({step, group, c, magnitude});
                }
                schedule.emplace(step, std::move(impulse));
        }
        return schedule;
}

void add_impulse(Vector& noise, const Schedule& schedule, std::size_t step)
{
        if (auto it = schedule.find(step); it != schedule.end())
        {
                noise += it->second;
        }
}
} // namespace

RandomStream::RandomStream(const SeedSpec& seed, std::uint64_t substream)
        : engine_(make_engine(seed, substream))
{
}

double RandomStream::normal()
{
        return normal_(engine_);
}

std::int64_t RandomStream::uniform_int(std::int64_t low, std::int64_t high)
{
        return std::uniform_int_distribution<std::int64_t>(low, high)(engine_);
}

std::size_t ShotNoiseSpec::corrupted_steps() const
{
        return static_cast<std::size_t>(std::llround(corrupted_fraction * static_cast<double>(window_length())));
}

Vector draw_gaussian(RandomStream& stream, const Vector& mean, const LowerTriangular& covariance_factor)
{
        Vector z(covariance_factor.dim(), 1);
        for (std::size_t i = 0; i < z.rows(); ++i)
        {
                z[i] = stream.normal();
        }
        return mean + covariance_factor * z;
}

Trajectory simulate(
        const StateSpaceModel& model,
        const InitialCondition& init,
        std::size_t horizon,
        const SeedSpec& seed,
        const std::optional<ShotNoiseSpec>& shot)
{
        if (horizon == 0)
        {
                throw std::invalid_argument("simulate: horizon must be at least 1");
        }
        const std::size_t q = model.noise_dim();
        const std::size_t m = model.measurement_dim();

        Trajectory t;
        t.horizon = horizon;

        Schedule process_impulses;
        Schedule measurement_impulses;
        if (shot)
        {
                if (shot->magnitude_low > shot->magnitude_high)
                {
                        throw std::invalid_argument("shot noise: magnitude_low exceeds magnitude_high");
                }
                if (shot->window_begin < 1 || shot->window_begin > shot->window_end || shot->window_end > horizon)
                {
                        throw std::invalid_argument("shot noise: eligible window outside the simulation horizon");
                }
                if (!(shot->corrupted_fraction >= 0 && shot->corrupted_fraction <= 1))
                {
                        throw std::invalid_argument("shot noise: corrupted fraction outside [0, 1]");
                }
                RandomStream shot_stream(seed, SHOT_SUBSTREAM);
                if (shot->targets.process)
                {
                        process_impulses = draw_schedule(shot_stream, *shot, NoiseGroup::Process, q, t.outlier_log);
                }
                if (shot->targets.measurement)
                {
                        measurement_impulses =
                                draw_schedule(shot_stream, *shot, NoiseGroup::Measurement, m, t.outlier_log);
                }
        }

        RandomStream noise(seed, NOISE_SUBSTREAM);
        const Vector zero_q(q, 1);
        const Vector zero_m(m, 1);

        t.initial_state = draw_gaussian(noise, init.mean, cholesky_lower_semidefinite(init.covariance));

        std::optional<LowerTriangular> q_sqrt;
        std::optional<LowerTriangular> r_sqrt;
        SystemMatrices sys = model.at(0);
        Vector x = t.initial_state;
        t.truth.reserve(horizon);
        t.measurements.reserve(horizon);
        for (std::size_t k = 1; k <= horizon; ++k)
        {
                if (!model.time_invariant() || !q_sqrt)
                {
                        sys = model.at(k - 1);
                        q_sqrt = cholesky_lower_semidefinite(sys.Q);
                }
                Vector w = draw_gaussian(noise, zero_q, *q_sqrt);
                add_impulse(w, process_impulses, k);
                x = sys.F * x + sys.G * w;

                if (!model.time_invariant() || !r_sqrt)
                {
                        sys = model.at(k);
                        r_sqrt = cholesky_lower_semidefinite(sys.R);
                }
                Vector v = draw_gaussian(noise, zero_m, *r_sqrt);
                add_impulse(v, measurement_impulses, k);
                t.measurements.push_back({k, sys.H * x + v});
                t.truth.push_back(x);
        }
        return t;
}

void write_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path)
{
        std::ofstream out(path);
        if (!out)
        {
                throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
        }
        const std::size_t n = trajectory.initial_state.rows();
        const std::size_t m = trajectory.measurements.empty() ? 0 : trajectory.measurements.front().value.rows();

        std::vector<int> w_flag(trajectory.horizon + 1, 0);
        std::vector<int> v_flag(trajectory.horizon + 1, 0);
        for (const Outlier& o : trajectory.outlier_log)
        {
                (o.group == NoiseGroup::Process ? w_flag : v_flag)[o.step] = 1;
        }

        out << "step";
        for (std::size_t i = 1; i <= n; ++i)
        {
                out << ",x" << i;
        }
        for (std::size_t i = 1; i <= m; ++i)
        {
                out << ",y" << i;
        }
        out << ",w_outlier,v_outlier\n";
        out << std::setprecision(17);
        for (std::size_t k = 1; k <= trajectory.horizon; ++k)
        {
                out << k;
                for (std::size_t i = 0; i < n; ++i)
                {
                        out << ',' << trajectory.truth[k - 1][i];
                }
                for (std::size_t i = 0; i < m; ++i)
                {
                        out << ',' << trajectory.measurements[k - 1].value[i];
                }
                out << ',' << w_flag[k] << ',' << v_flag[k] << '\n';
        }
        if (!out)
        {
                throw std::system_error(errno, std::generic_category(), "write failed for " + path.string());
        }
}

} // namespace mcckf
