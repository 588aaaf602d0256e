#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "malcast/pipeline/commands.hpp"

using namespace malcast;
namespace fs = std::filesystem;

namespace {

const std::string kCli = MALCAST_CLI_PATH;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("malcast_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  return out;
}

int run(const std::string& args, const fs::path& stderr_file) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2> " + stderr_file.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmall =
    "--seed 7 --synth.seed 99 --synth.months 30 --train.hidden 3 --train.epochs 3 --impute.n_trees 5 "
    "--impute.max_iter 2";

}  // namespace

TEST(OutputSetTest, CommitWritesEverythingAndLeavesNoTemporaries) {
  const auto dir = scratch("commit");
  OutputSet o;
  o.add("a.txt", "alpha");
  o.add("sub/b.txt", "beta");
  o.commit(dir);
  EXPECT_EQ(slurp(dir / "a.txt"), "alpha");
  EXPECT_EQ(slurp(dir / "sub/b.txt"), "beta");
  for (const auto& e : fs::recursive_directory_iterator(dir)) EXPECT_NE(e.path().extension(), ".tmp") << e.path();
}

TEST(OutputSetTest, FailedCommitRemovesItsTemporaries) {
  const auto dir = scratch("commit_fail");
  fs::create_directories(dir / "blocked" / "x.txt");  // a directory where a file should go
  OutputSet o;
  o.add("ok.txt", "fine");
  o.add("blocked/x.txt", "nope");
  EXPECT_THROW(o.commit(dir), IoError);
  EXPECT_FALSE(fs::exists(dir / "ok.txt"));
  EXPECT_FALSE(fs::exists(dir / "ok.txt.tmp"));
  EXPECT_FALSE(fs::exists(dir / "blocked" / "x.txt.tmp"));
}

TEST(OutputSetTest, MergePrefixesPaths) {
  OutputSet a, b;
  b.add("f.csv", "x");
  b.log.push_back("line");
  a.merge("data", b);
  EXPECT_EQ(a.files.count("data/f.csv"), 1u);
  EXPECT_EQ(a.log.size(), 1u);
}

TEST(Config, UnknownKeyIsAConfigError) {
  EXPECT_THROW(PipelineConfig::from_keys(KeyValues::parse_string("train.hiden = 4\n")), ConfigError);
  EXPECT_THROW(PipelineConfig::from_keys(KeyValues::parse_string("window.train_fraction = 1\n")), ConfigError);
  EXPECT_THROW(PipelineConfig::from_keys(KeyValues::parse_string("window.recursive = yes\n")), ConfigError);
}

TEST(Config, EffectiveConfigOmitsOutDirAndRoundTrips) {
  const auto c = PipelineConfig::from_keys(KeyValues::parse_string("seed = 3\nout_dir = /x\ntrain.hidden = 5\n"));
  const auto eff = c.effective();
  EXPECT_FALSE(eff.has("out_dir"));
  EXPECT_EQ(eff.get("train.hidden"), "5");
  const auto again = PipelineConfig::from_keys(eff);
  EXPECT_EQ(again.effective().to_string(), eff.to_string());
}

TEST(Config, StageSeedsAreDistinct) {
  EXPECT_NE(impute_seed(1), synth_seed(1));
  EXPECT_NE(train_seed(1, "Gitega", Variant::Univariate), train_seed(1, "Gitega", Variant::Multivariate));
  EXPECT_NE(train_seed(1, "Gitega", Variant::Univariate), train_seed(1, "Burunga", Variant::Univariate));
  EXPECT_EQ(train_seed(4, "Gitega", Variant::Univariate), train_seed(4, "Gitega", Variant::Univariate));
}

TEST(Config, EnvironmentSuppliesDefaultOutDir) {
  ::setenv(kOutDirEnv, "/tmp/from_env", 1);
  EXPECT_EQ(default_out_dir(), "/tmp/from_env");
  EXPECT_EQ(PipelineConfig{}.out_dir, "/tmp/from_env");
  ::unsetenv(kOutDirEnv);
  EXPECT_NE(default_out_dir(), "/tmp/from_env");
}

TEST(Commands, ImputeWithNothingMissingKeepsRows) {
  SynthConfig sc;
  sc.months = 24;
  sc.missingness = 0.0;
  const auto truth = generate(sc).truth;
  const auto out = cmd_impute(truth, MissForestParams{}, 1);
  EXPECT_EQ(out.files.at("imputed.csv"), to_csv_string(truth));
  EXPECT_NE(out.files.at("imputation_log.csv").find("province,missing,iterations,final_delta"), std::string::npos);
}

TEST(Commands, AggregateRejectsOldLevel) {
  SynthConfig sc;
  sc.months = 24;
  EXPECT_THROW(cmd_aggregate(generate(sc).truth, RedistrictingMap::burundi(), Scheme::Old), ArgumentError);
}

TEST(Commands, PipelineTableEntriesArePositiveAndFinite) {
  auto kv = KeyValues::parse_string("seed = 3\ntrain.hidden = 3\ntrain.epochs = 3\nimpute.n_trees = 5\n"
                                    "impute.max_iter = 2\nsynth.months = 30\n");
  const auto out = cmd_pipeline(PipelineConfig::from_keys(kv));
  std::istringstream csv(out.files.at("report/rmse_table.csv"));
  std::string line;
  std::getline(csv, line);
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    const auto parts = text::split_csv_line(line);
    ASSERT_EQ(parts.size(), 3u) << line;
    for (std::size_t k = 1; k < 3; ++k) {
      const double v = std::stod(std::string(parts[k]));
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_GT(v, 0.0) << line;
    }
    ++rows;
  }
  EXPECT_EQ(rows, 6u);
  EXPECT_EQ(out.files.count("report/curves/curve_burundi_multivariate.svg"), 1u);
  EXPECT_EQ(out.files.count("models/gitega_univariate.model"), 1u);
  EXPECT_EQ(out.files.count("forecasts/buhumuza_multivariate.csv"), 1u);
}

TEST(Cli, PipelineRunTwiceIsByteIdentical) {
  const auto a = scratch("cli_a"), b = scratch("cli_b");
  const auto err = scratch("cli_err") / "stderr.txt";
  ASSERT_EQ(run("--out " + a.string() + " pipeline " + kSmall, err), 0) << slurp(err);
  ASSERT_EQ(run("--out " + b.string() + " pipeline " + kSmall, err), 0) << slurp(err);
  const auto ta = tree(a), tb = tree(b);
  EXPECT_GT(ta.size(), 50u);
  EXPECT_EQ(ta, tb);
  const auto log = slurp(err);
  EXPECT_NE(log.find("seed: 7"), std::string::npos) << log;
  EXPECT_NE(log.find("config: train.hidden = 3"), std::string::npos) << log;
}

TEST(Cli, PipelineEqualsManualComposition) {
  const auto p = scratch("compose_pipe"), m = scratch("compose_manual");
  const auto err = scratch("compose_err") / "stderr.txt";
  ASSERT_EQ(run("--out " + p.string() + " pipeline " + kSmall, err), 0) << slurp(err);

  const std::string data = m.string() + "/data";
  ASSERT_EQ(run("--out " + data + " synth --synth.seed 99 --synth.months 30", err), 0) << slurp(err);
  ASSERT_EQ(run("--out " + data + " impute --input " + data + "/masked.csv --seed 7 --impute.n_trees 5 "
                "--impute.max_iter 2", err), 0) << slurp(err);
  ASSERT_EQ(run("--out " + data + " aggregate --input " + data + "/imputed.csv --level new", err), 0) << slurp(err);
  ASSERT_EQ(run("--out " + data + " aggregate --input " + data + "/provinces.csv --level country", err), 0)
      << slurp(err);
  std::string forecasts;
  for (const auto& region : report_regions()) {
    const std::string input = data + (region == kCountryName ? "/country.csv" : "/provinces.csv");
    for (const char* v : {"univariate", "multivariate"}) {
      const std::string stem = region_slug(region) + "_" + v;
      ASSERT_EQ(run("--out " + m.string() + "/models train --input " + input + " --region '" + region +
                    "' --variant " + v + " --seed 7 --train.hidden 3 --train.epochs 3", err), 0) << slurp(err);
      ASSERT_EQ(run("--out " + m.string() + "/forecasts forecast --model " + m.string() + "/models/" + stem +
                    ".model --input " + input, err), 0) << slurp(err);
      forecasts += " " + m.string() + "/forecasts/" + stem + ".csv";
    }
  }
  ASSERT_EQ(run("--out " + m.string() + "/report evaluate" + forecasts, err), 0) << slurp(err);

  auto tp = tree(p);
  tp.erase("effective_config.txt");
  EXPECT_EQ(tp, tree(m));
}

TEST(Cli, IncompleteEvaluationFailsWithOneLineError) {
  const auto dir = scratch("incomplete");
  const auto err = dir / "stderr.txt";
  const auto r = ForecastReport::make("Gitega", ModelVariant::Univariate, {{2021, 1}}, {1.0}, {2.0});
  std::ofstream(dir / "one.csv") << forecast_to_csv(r);
  const int code = run("--out " + (dir / "out").string() + " evaluate " + (dir / "one.csv").string(), err);
  EXPECT_EQ(code, 5);
  std::istringstream lines(slurp(err));
  std::vector<std::string> errors;
  for (std::string l; std::getline(lines, l);)
    if (l.rfind("error: ", 0) == 0) errors.push_back(l);
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0].rfind("error: completeness: ", 0), 0u) << errors[0];
  EXPECT_FALSE(fs::exists(dir / "out" / "rmse_table.txt"));
}

TEST(Cli, UsageAndInputErrorsMapToExitCodes) {
  const auto dir = scratch("codes");
  const auto err = dir / "stderr.txt";
  EXPECT_EQ(run("--out " + dir.string() + " pipeline --train.hidden", err), 2);
  EXPECT_EQ(run("--out " + dir.string() + " impute --input " + (dir / "absent.csv").string(), err), 3);
  EXPECT_NE(slurp(err).find("error: io: "), std::string::npos) << slurp(err);
  EXPECT_EQ(run("--out " + dir.string() + " aggregate --input x.csv --level old", err), 2);
}
