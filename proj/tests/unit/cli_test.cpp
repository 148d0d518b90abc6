#include "artifacts.hpp"
#include "config.hpp"
#include "run.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace biortheq::cli;
namespace fs = std::filesystem;

namespace {

json arcsine_config(const std::string& task = "equilibrium") {
  return {{"problem", {{"domain", {{"intervals", {{-1, 1}}}}}, {"grid_size", 400}}},
          {"task", {{"type", task}}}};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("biortheq_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  json with_out(json doc, const std::string& sub = "out") {
    doc["output"]["directory"] = (dir_ / sub).string();
    return doc;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

bool has_message(const std::vector<Diagnostic>& ds, const std::string& needle) {
  for (const auto& d : ds)
    if (d.message.find(needle) != std::string::npos || d.path.find(needle) != std::string::npos)
      return true;
  return false;
}

}  // namespace

TEST(Validate, WellFormedConfigHasNoDiagnostics) {
  EXPECT_TRUE(validate(arcsine_config()).empty());
}

TEST(Validate, BranchDomainViolated) {
  auto doc = arcsine_config();
  doc["problem"]["map"] = {{"type", "power"}, {"theta", 2}};
  EXPECT_TRUE(has_message(validate(doc), "branch domain violated"));
}

TEST(Validate, SeedRequiredForStochasticTasks) {
  auto doc = arcsine_config("sample");
  EXPECT_TRUE(has_message(validate(doc), "seed"));
  doc["task"]["seed"] = 3;
  EXPECT_TRUE(validate(doc).empty());
  EXPECT_FALSE(validate(arcsine_config("partition")).empty());
}

TEST(Validate, UnknownKeysAndRanges) {
  auto doc = arcsine_config();
  doc["task"]["bogus"] = 1;
  EXPECT_TRUE(has_message(validate(doc), "bogus"));
  doc = arcsine_config();
  doc["problem"]["grid_size"] = 1;
  EXPECT_FALSE(validate(doc).empty());
  doc = arcsine_config("admissibility");
  doc["task"]["delta"] = 0.0;
  EXPECT_FALSE(validate(doc).empty());
  EXPECT_FALSE(validate(json::array()).empty());
}

TEST(Validate, UnboundedDomainNeedsAdmissibleWeight) {
  json doc = {{"problem", {{"domain", {{"intervals", {{0, "inf"}}}}}}}, {"task", {{"type", "equilibrium"}}}};
  EXPECT_FALSE(validate(doc).empty());
  doc["problem"]["weight"] = {{"terms", {{{"kind", "monomial"}, {"coef", 1}, {"power", 1}}}}};
  EXPECT_TRUE(validate(doc).empty());
}

TEST(Artifacts, FormattingAndHashing) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CsvTable t({"a", "b"});
  t.row({"x,y", "say \"hi\""});
  EXPECT_EQ(t.str(), "a,b\r\n\"x,y\",\"say \"\"hi\"\"\"\r\n");
  EXPECT_THROW(t.row({"only one"}), std::logic_error);
}

TEST_F(CliTest, ArcsineEquilibrium) {
  const auto r = run(with_out(arcsine_config()));
  ASSERT_EQ(r.exit_code, kExitOk);
  const auto& eq = r.summary["results"]["equilibrium"];
  EXPECT_NEAR(eq["V_w"].get<double>(), 1.386, 0.05);
  EXPECT_TRUE(r.summary["results"]["frostman"]["pass"].get<bool>());
  EXPECT_EQ(r.summary["config"]["problem"]["grid_size"], 400);
  EXPECT_TRUE(r.summary["config"]["task"].contains("max_iters"));
  const json on_disk = json::parse(slurp(dir_ / "out" / "summary.json"));
  EXPECT_EQ(on_disk, r.summary);
}

TEST_F(CliTest, ManifestListsEveryFile) {
  auto doc = arcsine_config("fekete");
  doc["task"]["k"] = 8;
  doc["problem"]["grid_size"] = 100;
  const auto r = run(with_out(doc));
  ASSERT_EQ(r.exit_code, kExitOk);
  const auto manifest = slurp(dir_ / "out" / "manifest.csv");
  std::istringstream is(manifest);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "file,bytes,sha256\r");
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto c1 = line.find(','), c2 = line.rfind(',');
    const std::string file = line.substr(0, c1);
    const auto content = slurp(dir_ / "out" / file);
    EXPECT_EQ(std::stoull(line.substr(c1 + 1, c2 - c1 - 1)), content.size());
    EXPECT_EQ(line.substr(c2 + 1), sha256_hex(content));
    ++rows;
  }
  EXPECT_EQ(rows, r.files.size());
  EXPECT_TRUE(fs::exists(dir_ / "out" / "fekete_points.csv"));
}

TEST_F(CliTest, ReproducibleArtifacts) {
  auto doc = arcsine_config("sample");
  doc["problem"]["grid_size"] = 100;
  doc["task"]["k"] = 5;
  doc["task"]["seed"] = 77;
  doc["task"]["steps"] = 30000;
  doc["task"]["eta"] = 0.01;
  const auto a = run(with_out(doc, "a"));
  const auto b = run(with_out(doc, "b"));
  ASSERT_EQ(a.exit_code, kExitOk);
  for (const auto& f : a.files) {
    if (f == "summary.json" || f == "sample_batch.json") continue;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  Overrides o;
  o.seed = 78;
  o.out = (dir_ / "c").string();
  const auto c = run(doc, o);
  EXPECT_NE(slurp(dir_ / "a" / "samples.csv"), slurp(dir_ / "c" / "samples.csv"));
  EXPECT_EQ(c.summary["seed"], 78);
}

TEST_F(CliTest, ValidationWritesNothing) {
  auto doc = with_out(arcsine_config("admissibility"));
  doc["task"]["delta"] = 0.0;
  const auto r = run(doc);
  EXPECT_EQ(r.exit_code, kExitValidation);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
  Overrides o;
  o.task = "fekete";
  EXPECT_EQ(run(with_out(arcsine_config()), o).exit_code, kExitValidation);
}

TEST_F(CliTest, IterationBudgetGivesExitThree) {
  auto doc = arcsine_config();
  doc["task"]["max_iters"] = 2;
  const auto r = run(with_out(doc));
  EXPECT_EQ(r.exit_code, kExitNoConvergence);
  EXPECT_FALSE(r.summary["results"]["equilibrium"]["converged"].get<bool>());
  EXPECT_TRUE(fs::exists(dir_ / "out" / "measure.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "manifest.csv"));
}

TEST_F(CliTest, ResourceGuardGivesExitFour) {
  auto doc = arcsine_config();
  doc["problem"]["grid_size"] = 5000;
  const auto r = run(with_out(doc));
  EXPECT_EQ(r.exit_code, kExitResource);
  EXPECT_EQ(r.summary["status"], "resource_limit");
}

TEST_F(CliTest, EveryTaskRuns) {
  const std::vector<json> tasks = {
      {{"type", "frostman"}},
      {{"type", "fekete"}, {"k_max", 10}, {"k_step", 4}},
      {{"type", "sample"}, {"k", 4}, {"seed", 1}, {"steps", 20000}, {"rho", 0.3}, {"reference_cdf", "arcsine"}},
      {{"type", "partition"}, {"k_list", {1, 2, 3}}, {"seed", 2}, {"N", 2000}},
      {{"type", "extremal"}, {"k_list", {5, 10}}, {"test_points", {{3, 0}}}, {"green", {{"disk", {{"center", {0, 0}}, {"radius", 2}}}}}},
      {{"type", "admissibility"}},
  };
  for (const auto& t : tasks) {
    json doc = arcsine_config();
    doc["problem"]["grid_size"] = 120;
    doc["task"] = t;
    const auto r = run(with_out(doc, t["type"].get<std::string>()));
    EXPECT_EQ(r.exit_code, kExitOk) << t.dump() << "\n" << r.summary.dump();
    EXPECT_TRUE(fs::exists(dir_ / t["type"].get<std::string>() / "manifest.csv"));
  }
}

TEST_F(CliTest, ExecutableExitCodes) {
  fs::create_directories(dir_);
  const auto cfg = dir_ / "bad.json";
  {
    auto doc = arcsine_config("admissibility");
    doc["task"]["delta"] = 0.0;
    std::ofstream(cfg) << doc.dump();
  }
  const std::string exe = BIORTHEQ_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  EXPECT_EQ(status(exe + " admissibility --config " + cfg.string()), 2);
  EXPECT_EQ(status(exe + " nosuchtask --config " + cfg.string()), 2);
  const auto good = dir_ / "good.json";
  std::ofstream(good) << arcsine_config("admissibility").dump();
  EXPECT_EQ(status(exe + " admissibility --config " + good.string() + " --out " + (dir_ / "x").string() +
                   " --threads 2"),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "x" / "shells.csv"));
  EXPECT_EQ(status("BIORTHEQ_MAX_GRID=50 " + exe + " equilibrium --config " + good.string()), 2);
  auto big = arcsine_config();
  big["problem"]["grid_size"] = 100;
  std::ofstream(good) << big.dump();
  EXPECT_EQ(status("BIORTHEQ_MAX_GRID=50 " + exe + " equilibrium --config " + good.string() +
                   " --out " + (dir_ / "y").string()),
            4);
}
