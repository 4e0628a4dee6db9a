#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "realign/cli/config.hpp"
#include "realign/core/error.hpp"

namespace fs = std::filesystem;
using namespace realign;

namespace {

struct RunOutcome {
  int exit_code;
  std::string output;
};

// Runs the installed binary with stdout+stderr captured.
RunOutcome run_cli(const std::string& args, const fs::path& dir) {
  fs::path out = dir / "cmd_output.txt";
  std::string cmd = std::string(REALIGNFIT_BIN) + " " + args + " > " + out.string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  std::ifstream f(out);
  std::ostringstream buf;
  buf << f.rdbuf();
  return RunOutcome{WEXITSTATUS(rc), buf.str()};
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("realignfit_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string sample_csv() { return std::string(REALIGNFIT_SOURCE_DIR) + "/data/sample_ddi.csv"; }

std::string read_all(const fs::path& p) {
  std::ifstream f(p);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("RunConfig: defaults, file, and override precedence") {
  auto dir = fresh_dir("cfg");
  std::ofstream f(dir / "run.cfg");
  f << "# comment line\n";
  f << "encoder.layers = 4\n";
  f << "trainer.lr = 0.005\n";
  f.close();

  auto cfg = cli::RunConfig::load((dir / "run.cfg").string(), {"trainer.lr=0.01"});
  CHECK(cfg.integer("encoder.layers") == 4);       // file beats default
  CHECK(cfg.real("trainer.lr") == 0.01);           // override beats file
  CHECK(cfg.integer("encoder.hidden_dim") == 32);  // default

  CHECK_THROWS_AS(cli::RunConfig::load("", {"bogus.key=1"}), ConfigError);
  CHECK_THROWS_AS(cli::RunConfig::load((dir / "absent.cfg").string(), {}), ConfigError);

  auto echo = cfg.echo();
  CHECK(echo.size() == cli::RunConfig::defaults().size());
  CHECK(echo["trainer.lr"] == "0.01");
}

TEST_CASE("RunConfig: exit-code partition") {
  CHECK(cli::exit_code_for(ConfigError("x")) == 2);
  CHECK(cli::exit_code_for(DataError("x")) == 3);
  CHECK(cli::exit_code_for(NumericError("x")) == 4);
  CHECK(cli::exit_code_for(std::runtime_error("x")) == 3);
}

TEST_CASE("cli: split determinism and verification summary") {
  auto dir = fresh_dir("split");
  auto a = run_cli("split --data " + sample_csv() + " --scenario original --seed 7 --out " +
                       (dir / "a").string(),
                   dir);
  CHECK(a.exit_code == 0);
  CHECK(a.output.find("invariants verified: ok") != std::string::npos);
  auto b = run_cli("split --data " + sample_csv() + " --scenario original --seed 7 --out " +
                       (dir / "b").string(),
                   dir);
  CHECK(b.exit_code == 0);
  CHECK(read_all(dir / "a" / "manifest-original-seed7.json") ==
        read_all(dir / "b" / "manifest-original-seed7.json"));
}

TEST_CASE("cli: p2 split on single-scaffold data fails with a data error") {
  auto dir = fresh_dir("mono");
  {
    std::ofstream f(dir / "mono.csv");
    f << "mol_x,mol_y,label\nCCO,CCN,1\nCCC,CCO,1\nCCN,CCC,1\nCCO,CCS,1\nCCS,CCN,1\n";
  }
  auto res = run_cli("split --data " + (dir / "mono.csv").string() +
                         " --scenario p2 --seed 1 --out " + dir.string(),
                     dir);
  CHECK(res.exit_code == 3);
  CHECK(res.output.find("clusters") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "manifest-p2-seed1.json"));
}

TEST_CASE("cli: config errors exit with code 2") {
  auto dir = fresh_dir("cfgerr");
  auto bad_key = run_cli("split --data " + sample_csv() +
                             " --scenario original --seed 1 --set bogus.key=1 --out " +
                             dir.string(),
                         dir);
  CHECK(bad_key.exit_code == 2);

  auto missing_manifest = run_cli("train --data " + sample_csv() + " --manifest " +
                                      (dir / "absent.json").string() + " --out " + dir.string(),
                                  dir);
  CHECK(missing_manifest.exit_code == 2);

  auto mi_shift = run_cli("split --data " + sample_csv() +
                              " --scenario p1 --set model.task=mi --out " + dir.string(),
                          dir);
  CHECK(mi_shift.exit_code == 2);
}

TEST_CASE("cli: train + eval + analyze round trip") {
  auto dir = fresh_dir("roundtrip");
  std::string tiny = " --set encoder.hidden_dim=8 --set encoder.layers=2 --set "
                     "trainer.batch_size=8 --set trainer.T=1 --set trainer.T1=1 --set "
                     "trainer.T2=1 --set trainer.epochs=4";

  auto split = run_cli("split --data " + sample_csv() + " --scenario original --seed 5 --out " +
                           dir.string(),
                       dir);
  REQUIRE(split.exit_code == 0);
  std::string manifest = (dir / "manifest-original-seed5.json").string();

  auto train1 = run_cli("train --data " + sample_csv() + " --manifest " + manifest + " --out " +
                            (dir / "t1").string() + " --seed 5" + tiny,
                        dir);
  REQUIRE(train1.exit_code == 0);
  CHECK(train1.output.find("checkpoint:") != std::string::npos);

  auto eval1 = run_cli("eval --checkpoint " + (dir / "t1" / "checkpoint.json").string() +
                           " --data " + sample_csv() + " --manifest " + manifest + " --out " +
                           (dir / "t1").string(),
                       dir);
  REQUIRE(eval1.exit_code == 0);
  auto metrics = nlohmann::json::parse(read_all(dir / "t1" / "metrics-original.json"));
  CHECK(metrics.contains("metrics"));
  CHECK(metrics["metrics"].contains("ACC"));
  CHECK(metrics.contains("config"));
  CHECK(metrics["scenario"] == "original");

  // RPD against itself is all zeros
  auto eval2 = run_cli("eval --checkpoint " + (dir / "t1" / "checkpoint.json").string() +
                           " --data " + sample_csv() + " --manifest " + manifest +
                           " --baseline " + (dir / "t1" / "metrics-original.json").string() +
                           " --out " + (dir / "t2").string(),
                       dir);
  REQUIRE(eval2.exit_code == 0);
  auto with_rpd = nlohmann::json::parse(read_all(dir / "t2" / "metrics-original.json"));
  REQUIRE(with_rpd.contains("rpd"));
  for (const auto& [name, entry] : with_rpd["rpd"].items())
    CHECK(entry["percent"].get<double>() == 0.0);

  auto analyze = run_cli("analyze --checkpoint " + (dir / "t1" / "checkpoint.json").string() +
                             " --pair \"c1ccccc1CC(=O)O,S(=O)(=O)NCC\" --out " +
                             (dir / "an").string(),
                         dir);
  REQUIRE(analyze.exit_code == 0);
  CHECK(fs::exists(dir / "an" / "interaction.json"));
  CHECK(fs::exists(dir / "an" / "interaction-heatmap.svg"));
  CHECK(fs::exists(dir / "an" / "interaction-strength.svg"));

  auto bad_pair = run_cli("analyze --checkpoint " + (dir / "t1" / "checkpoint.json").string() +
                              " --pair \"C(Q,CC\" --out " + (dir / "an").string(),
                          dir);
  CHECK(bad_pair.exit_code == 3);

  auto tiny_pair = run_cli("analyze --checkpoint " + (dir / "t1" / "checkpoint.json").string() +
                               " --pair \"C,CC\" --out " + (dir / "an").string(),
                           dir);
  CHECK(tiny_pair.exit_code == 3);
}
