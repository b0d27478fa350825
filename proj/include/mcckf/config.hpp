#pragma once

#include "bench.hpp"
#include "filters.hpp"
#include "sim.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcckf
{

class ConfigError : public std::runtime_error
{
public:
        using std::runtime_error::runtime_error;
};

/// Experiment configuration as a flat map of dotted keys
/// (`section.key`), loaded from YAML and patched by KEY=VALUE overrides.
/// Only keys in the known schema are accepted.
class Config
{
public:
        /// Built-in defaults. kernel.sigma has none and must be supplied.
        Config();

        static Config load(const std::filesystem::path& path);

        /// Parses "key=value"; the key must be known.
        void apply_override(const std::string& assignment);
        void set(const std::string& key, const std::string& value);

        bool has(const std::string& key) const;
        const std::string& raw(const std::string& key) const;

        double get_double(const std::string& key) const;
        std::uint64_t get_uint(const std::string& key) const;
        bool get_bool(const std::string& key) const;
        std::vector<std::string> get_list(const std::string& key) const;

        /// Sorted key=value lines.
        std::string canonical() const;
        /// FNV-1a 64 of canonical(), hex.
        std::string hash() const;

        static const std::vector<std::string>& known_keys();

private:
        std::map<std::string, std::string> values_;
};

// Typed views of the sections.

Example1Constants model_constants(const Config& config);
std::optional<ShotNoiseSpec> shot_noise(const Config& config);
std::vector<Algorithm> algorithms(const Config& config);
std::vector<double> sweep_deltas(const Config& config);

} // namespace mcckf
