#include "cli.hpp"

#include "kpo/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kpo_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_cfg(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.cfg";
  kpo::write_text(p, text);
  return p;
}

int run(std::vector<std::string> args) { return kpo::cli::run(args); }

}  // namespace

TEST(Cli, ParamsSucceedsAndWritesSidecars) {
  const fs::path d = scratch("params");
  EXPECT_EQ(run({"params", "--out", d.string()}), 0);
  EXPECT_TRUE(fs::exists(d / "params.json"));
  EXPECT_TRUE(fs::exists(d / "metadata.json"));
  EXPECT_TRUE(fs::exists(d / "resolved.cfg"));
}

TEST(Cli, UsageErrors) {
  const fs::path d = scratch("usage");
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"bogus"}), 2);
  EXPECT_EQ(run({"spectrum", "--config", write_cfg(d, "nonsense = 1\n").string(), "--out",
                 d.string()}),
            2);
  EXPECT_EQ(run({"spectrum", "--config", write_cfg(d, "gamma =\n").string(), "--out", d.string()}),
            2);
  EXPECT_EQ(run({"spectrum", "--config", write_cfg(d, "gamma = 1\nsteps = 255\n").string(),
                 "--out", d.string()}),
            2);
  EXPECT_EQ(run({"trace", "--config", write_cfg(d, "gamma = 1,2\nanchors = 50\n").string(),
                 "--dim", "40", "--out", d.string()}),
            2);
  EXPECT_EQ(run({"params", "--config", write_cfg(d, "kappa = 0.001\ng3 = 0.01\n").string(),
                 "--out", d.string()}),
            2);
}

TEST(Cli, ComputationErrorExitsWithOne) {
  const fs::path d = scratch("compute");
  const fs::path cfg = write_cfg(d, "gamma = 5\noccupation_cap = 0.0001\n");
  EXPECT_EQ(run({"spectrum", "--config", cfg.string(), "--dim", "30", "--steps", "256", "--out",
                 d.string()}),
            1);
  EXPECT_TRUE(fs::exists(d / "error.json"));
}

TEST(Cli, SpectrumIsDeterministicAcrossThreadCounts) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const fs::path cfg = write_cfg(a, "gamma = 2,4,6\n");
  ASSERT_EQ(run({"spectrum", "--config", cfg.string(), "--dim", "40", "--steps", "256", "--threads",
                 "1", "--out", a.string()}),
            0);
  ASSERT_EQ(run({"spectrum", "--config", cfg.string(), "--dim", "40", "--steps", "256", "--threads",
                 "3", "--out", b.string()}),
            0);
  for (const char* f : {"spectrum_gamma_2.csv", "spectrum_gamma_6.csv", "kissing.csv",
                        "metadata.json", "resolved.cfg"}) {
    EXPECT_EQ(kpo::file_digest(a / f), kpo::file_digest(b / f)) << f;
  }
}

TEST(Cli, ResolvedConfigReproducesRun) {
  const fs::path a = scratch("resolved_a"), b = scratch("resolved_b");
  ASSERT_EQ(run({"ipr-scan", "--config", write_cfg(a, "gamma = 3\nkappa = 0.002\n").string(),
                 "--dim", "40", "--steps", "256", "--out", a.string()}),
            0);
  ASSERT_EQ(run({"ipr-scan", "--config", (a / "resolved.cfg").string(), "--out", b.string()}), 0);
  EXPECT_EQ(kpo::file_digest(a / "ipr_scan.csv"), kpo::file_digest(b / "ipr_scan.csv"));
}
