#include "mcckf/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace mcckf
{
namespace
{
std::string format_double(double v)
{
        std::ostringstream oss;
        oss << std::setprecision(17) << v;
        return oss.str();
}

std::string trim(const std::string& s)
{
        const auto begin = s.find_first_not_of(" \t");
        if (begin == std::string::npos)
        {
                return {};
        }
        const auto end = s.find_last_not_of(" \t");
        return s.substr(begin, end - begin + 1);
}

const std::map<std::string, std::string>& defaults()
{
        static const std::map<std::string, std::string> d = []
        {
                const Example1Constants c;
                const ShotNoiseSpec s;
                std::string grid;
                for (double delta : default_delta_grid())
                {
                        grid += (grid.empty() ? "" : ",") + format_double(delta);
                }
                return std::map<std::string, std::string>{
                        {"model.rho", format_double(c.rho)},
                        {"model.T", format_double(c.T)},
                        {"model.sigma_r2", format_double(c.sigma_r2)},
                        {"model.sigma_theta2", format_double(c.sigma_theta2)},
                        {"model.sigma1_2", format_double(c.sigma1_2)},
                        {"model.sigma2_2", format_double(c.sigma2_2)},
                        {"model.horizon", std::to_string(c.horizon)},
                        {"shot_noise.enabled", "true"},
                        {"shot_noise.fraction", format_double(s.corrupted_fraction)},
                        {"shot_noise.magnitude_low", std::to_string(s.magnitude_low)},
                        {"shot_noise.magnitude_high", std::to_string(s.magnitude_high)},
                        {"shot_noise.window_begin", std::to_string(s.window_begin)},
                        {"shot_noise.window_end", std::to_string(s.window_end)},
                        {"shot_noise.targets", "both"},
                        {"shot_noise.random_sign", "false"},
                        {"monte_carlo.runs", std::to_string(c.runs)},
                        {"monte_carlo.seed", "1"},
                        {"monte_carlo.algorithms", "conventional,sr1a,sr1b"},
                        {"monte_carlo.tolerance", "1e-6"},
                        {"sweep.deltas", grid},
                        {"sweep.runs", "20"},
                        {"sweep.sigma", "1e20"},
                        {"sweep.blowup_factor", "1000"},
                };
        }();
        return d;
}

// Keys that are valid but carry no default.
const std::vector<std::string>& optional_keys()
{
        static const std::vector<std::string> k = {
                "kernel.sigma",
                "model.pi0_bearing_scale",
                "model.pi0_bearing_rate_noise",
        };
        return k;
}

void flatten(const YAML::Node& node, const std::string& prefix, std::map<std::string, std::string>& out)
{
        switch (node.Type())
        {
        case YAML::NodeType::Map:
                for (const auto& item : node)
                {
                        const std::string key = item.first.as<std::string>();
                        flatten(item.second, prefix.empty() ? key : prefix + "." + key, out);
                }
                break;
        case YAML::NodeType::Sequence:
        {
                std::string joined;
                for (const auto& item : node)
                {
                        if (!item.IsScalar())
                        {
                                throw ConfigError("config key " + prefix + ": nested sequences are not supported");
                        }
                        joined += (joined.empty() ? "" : ",") + item.as<std::string>();
                }
                out[prefix] = joined;
                break;
        }
        case YAML::NodeType::Scalar:
                out[prefix] = node.as<std::string>();
                break;
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined:
                throw ConfigError("config key " + prefix + " has no value");
        }
}
} // namespace

Config::Config()
        : values_(defaults())
{
}

const std::vector<std::string>& Config::known_keys()
{
        static const std::vector<std::string> keys = []
        {
                std::vector<std::string> k;
                for (const auto& [key, value] : defaults())
                {
                        k.push_back(key);
                }
                k.insert(k.end(), optional_keys().begin(), optional_keys().end());
                std::sort(k.begin(), k.end());
                return k;
        }();
        return keys;
}

Config Config::load(const std::filesystem::path& path)
{
        YAML::Node root;
        try
        {
                root = YAML::LoadFile(path.string());
        }
        catch (const YAML::Exception& e)
        {
                throw ConfigError("cannot read config " + path.string() + ": " + e.what());
        }
        std::map<std::string, std::string> flat;
        if (!root.IsNull())
        {
                if (!root.IsMap())
                {
                        throw ConfigError("config " + path.string() + " must be a mapping of sections");
                }
                flatten(root, "", flat);
        }
        Config config;
        for (const auto& [key, value] : flat)
        {
                config.set(key, value);
        }
        return config;
}

void Config::apply_override(const std::string& assignment)
{
        const auto eq = assignment.find('=');
        if (eq == std::string::npos)
        {
                throw ConfigError("override '" + assignment + "' is not KEY=VALUE");
        }
        set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value)
{
        const auto& keys = known_keys();
        if (!std::binary_search(keys.begin(), keys.end(), key))
        {
                throw ConfigError("unknown config key '" + key + "'");
        }
        values_[key] = value;
}

bool Config::has(const std::string& key) const
{
        return values_.contains(key);
}

const std::string& Config::raw(const std::string& key) const
{
        const auto it = values_.find(key);
        if (it == values_.end())
        {
                throw ConfigError("missing config key '" + key + "'");
        }
        return it->second;
}

double Config::get_double(const std::string& key) const
{
        const std::string& s = raw(key);
        try
        {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                if (used != s.size() || !std::isfinite(v))
                {
                        throw std::invalid_argument(s);
                }
                return v;
        }
        catch (const std::exception&)
        {
                throw ConfigError("config key '" + key + "': '" + s + "' is not a finite number");
        }
}

std::uint64_t Config::get_uint(const std::string& key) const
{
        const std::string& s = raw(key);
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
        {
                throw ConfigError("config key '" + key + "': '" + s + "' is not a nonnegative integer");
        }
        return v;
}

bool Config::get_bool(const std::string& key) const
{
        const std::string& s = raw(key);
        if (s == "true" || s == "1" || s == "yes")
        {
                return true;
        }
        if (s == "false" || s == "0" || s == "no")
        {
                return false;
        }
        throw ConfigError("config key '" + key + "': '" + s + "' is not a boolean");
}

std::vector<std::string> Config::get_list(const std::string& key) const
{
        std::vector<std::string> items;
        std::istringstream iss(raw(key));
        std::string item;
        while (std::getline(iss, item, ','))
        {
                item = trim(item);
                if (!item.empty())
                {
                        items.push_back(item);
                }
        }
        return items;
}

std::string Config::canonical() const
{
        std::string s;
        for (const auto& [key, value] : values_)
        {
                s += key + "=" + value + "\n";
        }
        return s;
}

std::string Config::hash() const
{
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : canonical())
        {
                h ^= c;
                h *= 0x100000001b3ULL;
        }
        std::ostringstream oss;
        oss << std::hex << std::setw(16) << std::setfill('0') << h;
        return oss.str();
}

//

Example1Constants model_constants(const Config& config)
{
        Example1Constants c;
        c.rho = config.get_double("model.rho");
        c.T = config.get_double("model.T");
        c.sigma_r2 = config.get_double("model.sigma_r2");
        c.sigma_theta2 = config.get_double("model.sigma_theta2");
        c.sigma1_2 = config.get_double("model.sigma1_2");
        c.sigma2_2 = config.get_double("model.sigma2_2");
        c.horizon = config.get_uint("model.horizon");
        c.runs = config.get_uint("monte_carlo.runs");
        if (config.has("model.pi0_bearing_scale"))
        {
                c.pi0_bearing_scale = config.get_double("model.pi0_bearing_scale");
        }
        if (config.has("model.pi0_bearing_rate_noise"))
        {
                c.pi0_bearing_rate_noise = config.get_double("model.pi0_bearing_rate_noise");
        }
        if (!(c.T > 0) || c.horizon == 0)
        {
                throw ConfigError("model.T and model.horizon must be positive");
        }
        for (double v : {c.sigma_r2, c.sigma_theta2, c.sigma1_2, c.sigma2_2})
        {
                if (!(v > 0))
                {
                        throw ConfigError("model noise variances must be positive");
                }
        }
        return c;
}

std::optional<ShotNoiseSpec> shot_noise(const Config& config)
{
        if (!config.get_bool("shot_noise.enabled"))
        {
                return std::nullopt;
        }
        ShotNoiseSpec s;
        s.corrupted_fraction = config.get_double("shot_noise.fraction");
        s.magnitude_low = static_cast<std::int64_t>(config.get_double("shot_noise.magnitude_low"));
        s.magnitude_high = static_cast<std::int64_t>(config.get_double("shot_noise.magnitude_high"));
        s.window_begin = config.get_uint("shot_noise.window_begin");
        s.window_end = config.get_uint("shot_noise.window_end");
        s.random_sign = config.get_bool("shot_noise.random_sign");
        const std::string& targets = config.raw("shot_noise.targets");
        if (targets == "both")
        {
                s.targets = {true, true};
        }
        else if (targets == "process")
        {
                s.targets = {true, false};
        }
        else if (targets == "measurement")
        {
                s.targets = {false, true};
        }
        else
        {
                throw ConfigError("shot_noise.targets must be both, process or measurement");
        }
        if (!(s.corrupted_fraction >= 0 && s.corrupted_fraction <= 1))
        {
                throw ConfigError("shot_noise.fraction must lie in [0, 1]");
        }
        if (s.magnitude_low > s.magnitude_high)
        {
                throw ConfigError("shot_noise.magnitude_low exceeds shot_noise.magnitude_high");
        }
        if (s.window_begin < 1 || s.window_begin > s.window_end)
        {
                throw ConfigError("shot_noise window is empty");
        }
        return s;
}

std::vector<Algorithm> algorithms(const Config& config)
{
        std::vector<Algorithm> out;
        for (const std::string& name : config.get_list("monte_carlo.algorithms"))
        {
                const std::optional<Algorithm> a = parse_algorithm(name);
                if (!a)
                {
                        throw ConfigError("unknown algorithm '" + name + "'");
                }
                if (std::find(out.begin(), out.end(), *a) == out.end())
                {
                        out.push_back(*a);
                }
        }
        if (out.empty())
        {
                throw ConfigError("no algorithms selected");
        }
        return out;
}

std::vector<double> sweep_deltas(const Config& config)
{
        std::vector<double> grid;
        for (const std::string& item : config.get_list("sweep.deltas"))
        {
                try
                {
                        std::size_t used = 0;
                        grid.push_back(std::stod(item, &used));
                        if (used != item.size())
                        {
                                throw std::invalid_argument(item);
                        }
                }
                catch (const std::exception&)
                {
                        throw ConfigError("sweep.deltas: '" + item + "' is not a number");
                }
        }
        if (grid.empty())
        {
                throw ConfigError("sweep.deltas is empty");
        }
        for (std::size_t i = 0; i < grid.size(); ++i)
        {
                if (!(grid[i] > 0) || (i > 0 && !(grid[i] < grid[i - 1])))
                {
                        throw ConfigError("sweep.deltas must be positive and strictly decreasing");
                }
        }
        return grid;
}

} // namespace mcckf
