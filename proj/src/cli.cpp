#include "mcckf/cli.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <system_error>

namespace mcckf
{
namespace
{
int code(ExitCode c)
{
        return static_cast<int>(c);
}

std::string format_double(double v)
{
        std::ostringstream oss;
        oss << std::setprecision(17) << v;
        return oss.str();
}

std::string_view command_name(Subcommand s)
{
        switch (s)
        {
        case Subcommand::Equivalence:
                return "equivalence";
        case Subcommand::Example1:
                return "example1";
        case Subcommand::Sweep:
                return "sweep";
        case Subcommand::Simulate:
                return "simulate";
        }
        return "unknown";
}

void prepare_output_dir(const std::filesystem::path& dir)
{
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
        {
                throw std::system_error(ec, "cannot create output directory " + dir.string());
        }
}

void write_meta(
        const CliInvocation& invocation,
        const Config& config,
        const std::vector<std::pair<std::string, std::string>>& extra)
{
        const std::filesystem::path path = invocation.output_dir / "meta.txt";
        std::ofstream out(path);
        if (!out)
        {
                throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
        }
        out << "version=" << VERSION << '\n';
        out << "command=" << command_name(invocation.subcommand) << '\n';
        out << "seed=" << config.raw("monte_carlo.seed") << '\n';
        out << "config_hash=" << config.hash() << '\n';
        for (const auto& [key, value] : extra)
        {
                out << key << '=' << value << '\n';
        }
        out << "[config]\n" << config.canonical();
        if (!out)
        {
                throw std::system_error(errno, std::generic_category(), "write failed for " + path.string());
        }
}

Scenario example1_scenario(const Config& config)
{
        const Example1Constants constants = model_constants(config);
        const std::optional<ShotNoiseSpec> shot = shot_noise(config);
        if (shot && shot->window_end > constants.horizon)
        {
                throw ConfigError("shot_noise.window_end exceeds model.horizon");
        }
        Scenario s = build_example1(constants);
        s.shot = shot;
        return s;
}

std::size_t run_count(const Config& config, const std::string& key)
{
        const std::uint64_t runs = config.get_uint(key);
        if (runs == 0)
        {
                throw ConfigError(key + " must be at least 1");
        }
        return runs;
}

double relative_difference(double a, double b)
{
        if (std::isnan(a) || std::isnan(b))
        {
                return std::numeric_limits<double>::infinity();
        }
        const double scale = std::max(std::abs(a), std::abs(b));
        return scale == 0 ? 0 : std::abs(a - b) / scale;
}

std::filesystem::path rmse_path(const CliInvocation& invocation, Algorithm a)
{
        return invocation.output_dir / ("rmse_" + std::string(to_string(a)) + ".csv");
}

template <typename Command>
int guarded(const CliInvocation& invocation, std::ostream& err, Command command)
{
        try
        {
                return command(resolve_config(invocation));
        }
        catch (const ConfigError& e)
        {
                err << "config error: " << e.what() << '\n';
                return code(ExitCode::Usage);
        }
        catch (const std::invalid_argument& e)
        {
                err << "invalid configuration: " << e.what() << '\n';
                return code(ExitCode::Usage);
        }
        catch (const std::system_error& e)
        {
                err << "i/o error: " << e.what() << '\n';
                return code(ExitCode::Usage);
        }
}
} // namespace

Config resolve_config(const CliInvocation& invocation)
{
        Config config = invocation.config_path ? Config::load(*invocation.config_path) : Config();
        for (const std::string& o : invocation.overrides)
        {
                config.apply_override(o);
        }
        if (invocation.seed)
        {
                config.set("monte_carlo.seed", std::to_string(*invocation.seed));
        }
        if (invocation.runs)
        {
                config.set(
                        invocation.subcommand == Subcommand::Sweep ? "sweep.runs" : "monte_carlo.runs",
                        std::to_string(*invocation.runs));
        }
        if (invocation.algorithms)
        {
                config.set("monte_carlo.algorithms", *invocation.algorithms);
        }
        if (invocation.tolerance)
        {
                config.set("monte_carlo.tolerance", format_double(*invocation.tolerance));
        }
        return config;
}

int cmd_equivalence(const CliInvocation& invocation, std::ostream& out, std::ostream& err)
{
        return guarded(
                invocation, err,
                [&](const Config& config)
                {
                        const KernelSpec kernel(config.get_double("kernel.sigma"));
                        const double tolerance = config.get_double("monte_carlo.tolerance");
                        const Scenario scenario = example1_scenario(config);
                        const std::size_t runs = run_count(config, "monte_carlo.runs");
                        const std::uint64_t seed = config.get_uint("monte_carlo.seed");

                        const std::vector<RmseReport> reports =
                                run_monte_carlo(MCC_ALGORITHMS, scenario, runs, seed, {kernel, std::nullopt});

                        prepare_output_dir(invocation.output_dir);
                        for (const RmseReport& r : reports)
                        {
                                write_csv(r, rmse_path(invocation, r.algorithm));
                        }

                        const std::pair<std::size_t, std::size_t> pairs[] = {{1, 0}, {2, 0}, {2, 1}};
                        double max_diff = 0;
                        const std::filesystem::path diff_path = invocation.output_dir / "diff.csv";
                        std::ofstream diff(diff_path);
                        if (!diff)
                        {
                                throw std::system_error(errno, std::generic_category(), "cannot open " + diff_path.string());
                        }
                        diff << "step";
                        for (const auto& [a, b] : pairs)
                        {
                                diff << ',' << to_string(reports[a].algorithm) << "_vs_" << to_string(reports[b].algorithm);
                        }
                        diff << '\n' << std::setprecision(17);
                        for (std::size_t k = 0; k < scenario.horizon; ++k)
                        {
                                diff << (k + 1);
                                for (const auto& [a, b] : pairs)
                                {
                                        const double d = relative_difference(reports[a].total[k], reports[b].total[k]);
                                        max_diff = std::max(max_diff, d);
                                        diff << ',' << d;
                                }
                                diff << '\n';
                        }
                        diff.close();

                        std::size_t diverged = 0;
                        for (const RmseReport& r : reports)
                        {
                                diverged += r.diverged_runs;
                                out << std::left << std::setw(14) << to_string(r.algorithm) << " mean total RMSE "
                                    << std::setprecision(10) << r.scalar_summary << "  diverged " << r.diverged_runs
                                    << "/" << r.runs << '\n';
                        }
                        write_meta(
                                invocation, config,
                                {{"kernel_sigma", format_double(kernel.sigma())},
                                 {"tolerance", format_double(tolerance)}});

                        const bool ok = diverged == 0 && max_diff < tolerance;
                        out << "max relative curve difference " << std::setprecision(3) << max_diff << " (tolerance "
                            << tolerance << "): " << (ok ? "equivalent" : "NOT equivalent") << '\n';
                        return code(ok ? ExitCode::Ok : ExitCode::CriteriaViolated);
                });
}

int cmd_example1(const CliInvocation& invocation, std::ostream& out, std::ostream& err)
{
        return guarded(
                invocation, err,
                [&](const Config& config)
                {
                        const KernelSpec kernel(config.get_double("kernel.sigma"));
                        const std::vector<Algorithm> selected = algorithms(config);
                        const Scenario scenario = example1_scenario(config);
                        const std::size_t runs = run_count(config, "monte_carlo.runs");
                        const std::uint64_t seed = config.get_uint("monte_carlo.seed");

                        const std::vector<RmseReport> reports =
                                run_monte_carlo(selected, scenario, runs, seed, {kernel, std::nullopt});

                        prepare_output_dir(invocation.output_dir);
                        for (const RmseReport& r : reports)
                        {
                                write_csv(r, rmse_path(invocation, r.algorithm));
                                out << std::left << std::setw(14) << to_string(r.algorithm) << " mean total RMSE "
                                    << std::setprecision(10) << r.scalar_summary << "  diverged " << r.diverged_runs
                                    << "/" << r.runs << '\n';
                                if (invocation.verbosity > 0)
                                {
                                        for (std::size_t i = 0; i < r.run_statuses.size(); ++i)
                                        {
                                                if (!r.run_statuses[i].completed)
                                                {
                                                        out << "  run " << i << ": " << r.run_statuses[i].reason << '\n';
                                                }
                                        }
                                }
                        }
                        write_meta(invocation, config, {{"kernel_sigma", format_double(kernel.sigma())}});
                        return code(ExitCode::Ok);
                });
}

int cmd_sweep(const CliInvocation& invocation, std::ostream& out, std::ostream& err)
{
        return guarded(
                invocation, err,
                [&](const Config& config)
                {
                        const std::vector<double> grid = sweep_deltas(config);
                        const KernelSpec kernel(config.get_double("sweep.sigma"));
                        const double blowup = config.get_double("sweep.blowup_factor");
                        const std::vector<Algorithm> selected = algorithms(config);
                        const std::size_t runs = run_count(config, "sweep.runs");
                        const std::uint64_t seed = config.get_uint("monte_carlo.seed");
                        Example1Constants constants = model_constants(config);

                        const SweepReport report = run_conditioning_sweep(
                                selected, grid, runs, seed, {kernel, std::nullopt}, constants, blowup);

                        prepare_output_dir(invocation.output_dir);
                        write_csv(report, invocation.output_dir / "sweep.csv");
                        write_meta(
                                invocation, config,
                                {{"kernel_sigma", format_double(kernel.sigma())},
                                 {"blowup_factor", format_double(blowup)}});

                        if (invocation.verbosity > 0)
                        {
                                for (const SweepCell& c : report.cells)
                                {
                                        out << std::setprecision(3) << c.delta << ' ' << std::left << std::setw(14)
                                            << to_string(c.algorithm) << ' ' << std::setprecision(6) << c.scalar_rmse
                                            << (c.blown_up ? "  *" : "") << '\n';
                                }
                        }
                        out << "algorithm      breakdown delta\n";
                        for (std::size_t a = 0; a < report.algorithms.size(); ++a)
                        {
                                out << std::left << std::setw(14) << to_string(report.algorithms[a]) << ' ';
                                if (report.breakdown_delta[a])
                                {
                                        out << std::setprecision(3) << *report.breakdown_delta[a] << '\n';
                                }
                                else
                                {
                                        out << "none\n";
                                }
                        }
                        const bool ok = sr1b_breaks_last(report);
                        out << "sr1b breaks down last: " << (ok ? "yes" : "NO") << '\n';
                        return code(ok ? ExitCode::Ok : ExitCode::CriteriaViolated);
                });
}

int cmd_simulate(const CliInvocation& invocation, std::ostream& out, std::ostream& err)
{
        return guarded(
                invocation, err,
                [&](const Config& config)
                {
                        const Scenario scenario = example1_scenario(config);
                        const std::uint64_t seed = config.get_uint("monte_carlo.seed");
                        const Trajectory t = simulate(scenario.model, scenario.init, scenario.horizon, {seed, 0}, scenario.shot);
                        prepare_output_dir(invocation.output_dir);
                        write_trajectory_csv(t, invocation.output_dir / "trajectory.csv");
                        write_meta(invocation, config, {});
                        out << "wrote " << t.horizon << " steps, " << t.outlier_log.size() << " impulses\n";
                        return code(ExitCode::Ok);
                });
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
        CLI::App app{"Maximum correntropy Kalman filter experiments"};
        app.require_subcommand(1);

        CliInvocation inv;
        std::string config_path;
        std::string output_dir = inv.output_dir.string();
        std::uint64_t seed = 0;
        std::uint64_t runs = 0;
        std::string algorithm_list;
        double tolerance = 0;

        const auto add_common = [&](CLI::App* cmd)
        {
                cmd->add_option("--config", config_path, "YAML experiment configuration");
                cmd->add_option("--out", output_dir, "Output directory");
                cmd->add_option("--seed", seed, "Master seed");
                cmd->add_option("--runs", runs, "Monte Carlo runs");
                cmd->add_option("--algorithms", algorithm_list, "Comma-separated algorithm list");
                cmd->add_option("--tolerance", tolerance, "Equivalence tolerance");
                cmd->add_option("--set", inv.overrides, "KEY=VALUE override (repeatable)")->take_all();
                cmd->add_flag("-v,--verbose", "Verbose output");
        };
        CLI::App* equivalence = app.add_subcommand("equivalence", "Check that the three MCC-KF forms coincide");
        CLI::App* example1 = app.add_subcommand("example1", "Radar tracking Monte Carlo with shot noise");
        CLI::App* sweep = app.add_subcommand("sweep", "Ill-conditioning breakdown sweep");
        CLI::App* simulate_cmd = app.add_subcommand("simulate", "Write one simulated trajectory");
        for (CLI::App* cmd : {equivalence, example1, sweep, simulate_cmd})
        {
                add_common(cmd);
        }

        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try
        {
                app.parse(reversed);
        }
        catch (const CLI::ParseError& e)
        {
                const int rc = app.exit(e, out, err);
                return rc == 0 ? code(ExitCode::Ok) : code(ExitCode::Usage);
        }

        CLI::App* chosen = app.get_subcommands().front();
        if (chosen->count("--config") > 0)
        {
                inv.config_path = config_path;
        }
        inv.output_dir = output_dir;
        inv.verbosity = static_cast<int>(chosen->count("--verbose"));
        if (chosen->count("--seed") > 0)
        {
                inv.seed = seed;
        }
        if (chosen->count("--runs") > 0)
        {
                inv.runs = runs;
        }
        if (chosen->count("--algorithms") > 0)
        {
                inv.algorithms = algorithm_list;
        }
        if (chosen->count("--tolerance") > 0)
        {
                inv.tolerance = tolerance;
        }

        if (chosen == equivalence)
        {
                inv.subcommand = Subcommand::Equivalence;
                return cmd_equivalence(inv, out, err);
        }
        if (chosen == example1)
        {
                inv.subcommand = Subcommand::Example1;
                return cmd_example1(inv, out, err);
        }
        if (chosen == sweep)
        {
                inv.subcommand = Subcommand::Sweep;
                return cmd_sweep(inv, out, err);
        }
        inv.subcommand = Subcommand::Simulate;
        return cmd_simulate(inv, out, err);
}

} // namespace mcckf
