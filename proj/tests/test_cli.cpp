#include "mcckf/cli.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace mcckf;

namespace
{
class CliTest : public ::testing::Test
{
protected:
        void SetUp() override
        {
                root_ = std::filesystem::temp_directory_path()
                        / ("mcckf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
                std::filesystem::remove_all(root_);
                std::filesystem::create_directories(root_);
        }

        void TearDown() override
        {
                std::filesystem::remove_all(root_);
        }

        int run(std::vector<std::string> args)
        {
                out_.str("");
                err_.str("");
                return run_cli(args, out_, err_);
        }

        std::string dir(const std::string& name) const
        {
                return (root_ / name).string();
        }

        static std::string slurp(const std::filesystem::path& path)
        {
                std::ifstream in(path, std::ios::binary);
                std::ostringstream ss;
                ss << in.rdbuf();
                return ss.str();
        }

        std::filesystem::path write_config(const std::string& text)
        {
                const auto path = root_ / "config.yaml";
                std::ofstream(path) << text;
                return path;
        }

        std::filesystem::path root_;
        std::ostringstream out_;
        std::ostringstream err_;
};
} // namespace

TEST(Config, DefaultsAndOverrides)
{
        Config c;
        EXPECT_FALSE(c.has("kernel.sigma"));
        EXPECT_EQ(c.get_uint("monte_carlo.runs"), 100u);
        c.apply_override("shot_noise.fraction = 0.1");
        EXPECT_EQ(c.get_double("shot_noise.fraction"), 0.1);
        c.apply_override("shot_noise.fraction=0.3");
        EXPECT_EQ(c.get_double("shot_noise.fraction"), 0.3);
        EXPECT_THROW(c.apply_override("nonsense"), ConfigError);
        EXPECT_THROW(c.apply_override("model.unknown=1"), ConfigError);
        EXPECT_THROW(c.get_double("kernel.sigma"), ConfigError);
}

TEST(Config, TypedViewsValidate)
{
        Config c;
        c.set("sweep.deltas", "1e-1, 1e-3");
        EXPECT_EQ(sweep_deltas(c), (std::vector<double>{1e-1, 1e-3}));
        c.set("sweep.deltas", "");
        EXPECT_THROW(sweep_deltas(c), ConfigError);
        c.set("sweep.deltas", "1e-3,1e-1");
        EXPECT_THROW(sweep_deltas(c), ConfigError);
        c.set("monte_carlo.algorithms", "sr1b,sr1b,conventional");
        EXPECT_EQ(algorithms(c), (std::vector<Algorithm>{Algorithm::SquareRoot1b, Algorithm::Conventional}));
        c.set("monte_carlo.algorithms", "ekf");
        EXPECT_THROW(algorithms(c), ConfigError);
        c.set("shot_noise.enabled", "false");
        EXPECT_FALSE(shot_noise(c).has_value());
        c.set("shot_noise.enabled", "maybe");
        EXPECT_THROW(shot_noise(c), ConfigError);
        c.set("model.T", "-1");
        EXPECT_THROW(model_constants(c), ConfigError);
}

TEST(Config, CanonicalHashTracksContent)
{
        Config a;
        Config b;
        EXPECT_EQ(a.hash(), b.hash());
        b.set("monte_carlo.seed", "2");
        EXPECT_NE(a.hash(), b.hash());
        EXPECT_EQ(a.hash().size(), 16u);
}

TEST_F(CliTest, PrecedenceFileThenSetThenFlags)
{
        const auto path = write_config("monte_carlo:\n  seed: 5\n  runs: 7\nkernel:\n  sigma: 2\n");
        CliInvocation inv;
        inv.config_path = path;
        Config c = resolve_config(inv);
        EXPECT_EQ(c.get_uint("monte_carlo.seed"), 5u);
        EXPECT_EQ(c.get_double("kernel.sigma"), 2.0);

        inv.overrides = {"monte_carlo.seed=6"};
        EXPECT_EQ(resolve_config(inv).get_uint("monte_carlo.seed"), 6u);
        inv.seed = 8;
        EXPECT_EQ(resolve_config(inv).get_uint("monte_carlo.seed"), 8u);

        inv.runs = 3;
        EXPECT_EQ(resolve_config(inv).get_uint("monte_carlo.runs"), 3u);
        inv.subcommand = Subcommand::Sweep;
        c = resolve_config(inv);
        EXPECT_EQ(c.get_uint("sweep.runs"), 3u);
        EXPECT_EQ(c.get_uint("monte_carlo.runs"), 7u);
}

TEST_F(CliTest, ConfigFileErrors)
{
        EXPECT_EQ(run({"example1", "--config", (root_ / "missing.yaml").string()}), 2);
        const auto path = write_config("model:\n  bogus: 1\n");
        EXPECT_EQ(run({"example1", "--config", path.string(), "--set", "kernel.sigma=1"}), 2);
        EXPECT_NE(err_.str().find("model.bogus"), std::string::npos);
}

TEST_F(CliTest, UsageErrors)
{
        EXPECT_EQ(run({}), 2);
        EXPECT_EQ(run({"frobnicate"}), 2);
        EXPECT_EQ(run({"simulate", "--unknown"}), 2);
        EXPECT_EQ(run({"simulate", "--seed", "abc"}), 2);
        EXPECT_EQ(run({"simulate", "--set", "nope=1", "--out", dir("s")}), 2);
        EXPECT_EQ(run({"--help"}), 0);
        EXPECT_FALSE(std::filesystem::exists(dir("s")));
}

TEST_F(CliTest, EquivalenceExitCodes)
{
        const std::vector<std::string> base{"equivalence", "--runs", "4", "--set", "kernel.sigma=3e4"};

        auto args = base;
        args.insert(args.end(), {"--out", dir("ok")});
        EXPECT_EQ(run(args), 0) << err_.str();
        for (const char* f : {"rmse_conventional.csv", "rmse_sr1a.csv", "rmse_sr1b.csv", "diff.csv", "meta.txt"})
        {
                EXPECT_TRUE(std::filesystem::exists(root_ / "ok" / f)) << f;
        }

        args = base;
        args.insert(args.end(), {"--tolerance", "0", "--out", dir("zero")});
        EXPECT_EQ(run(args), 1);

        EXPECT_EQ(run({"equivalence", "--runs", "4", "--out", dir("nosigma")}), 2);
        EXPECT_NE(err_.str().find("kernel.sigma"), std::string::npos);
}

TEST_F(CliTest, Example1Outputs)
{
        EXPECT_EQ(run({"example1", "--algorithms", "sr1b", "--runs", "2", "--set", "kernel.sigma=3e4", "--out", dir("e")}), 0);
        std::size_t csvs = 0;
        for (const auto& entry : std::filesystem::directory_iterator(root_ / "e"))
        {
                csvs += entry.path().extension() == ".csv";
        }
        EXPECT_EQ(csvs, 1u);
        EXPECT_TRUE(std::filesystem::exists(root_ / "e" / "rmse_sr1b.csv"));

        EXPECT_EQ(run({"example1", "--runs", "0", "--set", "kernel.sigma=1", "--out", dir("z")}), 2);
        EXPECT_EQ(run({"example1", "--algorithms", "pf", "--set", "kernel.sigma=1", "--out", dir("z")}), 2);
        EXPECT_EQ(run({"example1", "--runs", "2", "--set", "kernel.sigma=-1", "--out", dir("z")}), 2);
}

TEST_F(CliTest, SweepExitCodes)
{
        EXPECT_EQ(run({"sweep", "--runs", "2", "--set", "sweep.deltas=1e-1", "--out", dir("large")}), 0);
        EXPECT_NE(out_.str().find("none"), std::string::npos);
        const std::string csv = slurp(root_ / "large" / "sweep.csv");
        EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);

        EXPECT_EQ(run({"sweep", "--set", "sweep.deltas=", "--out", dir("empty")}), 2);
        EXPECT_EQ(run({"sweep", "--set", "sweep.deltas=1e-3,1e-2", "--out", dir("up")}), 2);

        // A blow-up factor below one flags every cell, so sr1b cannot break last.
        EXPECT_EQ(
                run({"sweep", "--runs", "2", "--algorithms", "sr1b,conventional", "--set", "sweep.deltas=1e-1,1e-14",
                     "--set", "sweep.blowup_factor=1e-3", "--out", dir("violated")}),
                1);
}

TEST_F(CliTest, SimulateIsByteIdentical)
{
        ASSERT_EQ(run({"simulate", "--seed", "7", "--out", dir("a")}), 0);
        ASSERT_EQ(run({"simulate", "--seed", "7", "--out", dir("b")}), 0);
        ASSERT_EQ(run({"simulate", "--seed", "8", "--out", dir("c")}), 0);
        const std::string a = slurp(root_ / "a" / "trajectory.csv");
        EXPECT_FALSE(a.empty());
        EXPECT_EQ(a, slurp(root_ / "b" / "trajectory.csv"));
        EXPECT_NE(a, slurp(root_ / "c" / "trajectory.csv"));
        EXPECT_EQ(slurp(root_ / "a" / "meta.txt"), slurp(root_ / "b" / "meta.txt"));
}

TEST_F(CliTest, MetaRecordsProvenance)
{
        ASSERT_EQ(run({"simulate", "--seed", "7", "--out", dir("m")}), 0);
        const std::string meta = slurp(root_ / "m" / "meta.txt");
        EXPECT_NE(meta.find("version=" + std::string(VERSION)), std::string::npos);
        EXPECT_NE(meta.find("seed=7"), std::string::npos);
        EXPECT_NE(meta.find("config_hash="), std::string::npos);
        EXPECT_NE(meta.find("monte_carlo.seed=7"), std::string::npos);
}
