#pragma once

#include "config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mcckf
{

inline constexpr const char* VERSION = "0.1.0";

/// Process exit codes: criteria met, criteria violated, usage or config error.
enum class ExitCode : int
{
        Ok = 0,
        CriteriaViolated = 1,
        Usage = 2,
};

enum class Subcommand
{
        Equivalence,
        Example1,
        Sweep,
        Simulate,
};

struct CliInvocation
{
        Subcommand subcommand = Subcommand::Equivalence;
        std::optional<std::filesystem::path> config_path;
        std::vector<std::string> overrides;
        std::filesystem::path output_dir = "out";
        std::optional<std::uint64_t> seed;
        std::optional<std::uint64_t> runs;
        std::optional<std::string> algorithms;
        std::optional<double> tolerance;
        int verbosity = 0;
};

/// Resolves the effective configuration: built-in defaults, then the config
/// file, then --set overrides in order, then the dedicated flags.
Config resolve_config(const CliInvocation& invocation);

int cmd_equivalence(const CliInvocation& invocation, std::ostream& out, std::ostream& err);
int cmd_example1(const CliInvocation& invocation, std::ostream& out, std::ostream& err);
int cmd_sweep(const CliInvocation& invocation, std::ostream& out, std::ostream& err);
int cmd_simulate(const CliInvocation& invocation, std::ostream& out, std::ostream& err);

/// Parses argv-style arguments (without the program name) and dispatches.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mcckf
