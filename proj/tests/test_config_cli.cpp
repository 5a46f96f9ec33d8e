#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "lossyhom/config_io.hpp"

using namespace lossyhom;
namespace fs = std::filesystem;

namespace {

const char* kReference = R"({
  "units": "natural",
  "source": {"omega_sum": 20, "bandwidth": 1},
  "arm1": {"length": 1, "medium": {"k0": [15, 7], "alpha": [1.5, 1.0], "beta": [0, 0]}},
  "arm2": {"length": 1.5, "medium": "vacuum"},
  "oracle": {"freq_points": 1025, "time_points": 513},
  "sweep": {"parameter": "arm2.length", "start": 0.5, "stop": 2.5, "steps": 9},
  "tune": {"free": ["x2"], "bounds": {"x2": [0.1, 3]}}
})";

const char* kSymmetric = R"({
  "units": "natural",
  "source": {"omega_sum": 20, "bandwidth": 1},
  "arm1": {"length": 1, "medium": "vacuum"},
  "arm2": {"length": 1, "medium": "vacuum"}
})";

class TempDir {
public:
  TempDir()
      : path_(fs::temp_directory_path() /
              (std::string("lossyhom_test_") + ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }

  std::string write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
  fs::path path_;
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lossyhom");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string read(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(ConfigParse, ReferenceLoads) {
  const auto app = parse_config(json::parse(kReference));
  EXPECT_EQ(app.interferometer.source.units, Units::natural);
  EXPECT_TRUE(app.interferometer.arm2.is_vacuum());
  EXPECT_EQ(app.grids.freq_points, 1025);
  ASSERT_TRUE(app.sweep.has_value());
  EXPECT_EQ(app.sweep->grids.freq_points, 1025);
  ASSERT_TRUE(app.tune.has_value());
  EXPECT_EQ(app.tune->free.size(), 1u);
}

TEST(ConfigParse, UnknownKeyIsNamed) {
  auto j = json::parse(kReference);
  j["arm1"]["colour"] = "red";
  try {
    parse_config(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("arm1.colour"), std::string::npos) << e.what();
  }
}

TEST(ConfigParse, MissingAndMistypedFields) {
  auto j = json::parse(kReference);
  j["source"].erase("bandwidth");
  EXPECT_THROW(parse_config(j), ConfigError);
  j = json::parse(kReference);
  j["arm1"]["length"] = "one";
  EXPECT_THROW(parse_config(j), ConfigError);
  j = json::parse(kReference);
  j["arm1"]["medium"]["alpha"] = json::array({1.5});
  EXPECT_THROW(parse_config(j), ConfigError);
  j = json::parse(kReference);
  j["beta_convention"] = "three";
  EXPECT_THROW(parse_config(j), ConfigError);
  j = json::parse(kReference);
  j["oracle"]["freq_points"] = 1024;
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(ConfigParse, UnitsOverrideAndDefault) {
  auto j = json::parse(kReference);
  j.erase("units");
  // SI default: omega_sum = 20 rad/s with B = 1 is still narrow-band, c = 299792458.
  EXPECT_EQ(parse_config(j).interferometer.source.units, Units::si);
  EXPECT_EQ(parse_config(j, Units::natural).interferometer.source.units, Units::natural);
  EXPECT_THROW(parse_units("cgs"), ConfigError);
}

TEST(ConfigParse, LorentzMedium) {
  const auto j = json::parse(R"({
    "source": {"omega_sum": 2.4e15, "bandwidth": 1e13},
    "arm1": {"length": 0.01, "medium": {"lorentz": {"plasma_freq": 1e15, "resonance_freq": 4e15, "damping": 1e13}}},
    "arm2": {"length": 0.01, "medium": "vacuum"}
  })");
  const auto app = parse_config(j);
  const auto d = app.interferometer.dispersion1();
  EXPECT_GT(d.k0.imag(), 0.0);
  EXPECT_GT(d.alpha.real(), 1.0 / kSpeedOfLightSI);

  auto bad = j;
  bad["arm1"]["medium"]["lorentz"]["resonance_freq"] = 1.2e15;
  EXPECT_THROW(parse_config(bad), ConfigError);
}

TEST(ConfigParse, PassivityViolationIsConfigError) {
  auto j = json::parse(kReference);
  j["arm1"]["medium"]["k0"] = json::array({15, 1});
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Cli, SimulateSymmetricVacuumIsDark) {
  TempDir dir;
  const auto r = run_cli({"simulate", "--config", dir.write("c.json", kSymmetric)});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["closed_form"]["p_normalized"].get<double>(), 0.0);
  EXPECT_NE(r.out.find("\"p_normalized\": 0.0"), std::string::npos);
  EXPECT_FALSE(j.contains("oracle"));
}

TEST(Cli, SimulateWithOracle) {
  TempDir dir;
  const auto r = run_cli({"simulate", "--config", dir.write("c.json", kReference), "--oracle"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["closed_form"]["p_normalized"].get<double>(), 0.632120558828558, 1e-12);
  EXPECT_LE(j["abs_deviation"].get<double>(), 1e-3);
}

TEST(Cli, OutputIsDeterministic) {
  TempDir dir;
  const auto path = dir.write("c.json", kReference);
  const auto a = run_cli({"simulate", "--config", path, "--oracle"});
  const auto b = run_cli({"simulate", "--config", path, "--oracle"});
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, GridsFlagOverridesConfig) {
  TempDir dir;
  const auto path = dir.write("c.json", kReference);
  EXPECT_EQ(run_cli({"simulate", "--config", path, "--oracle", "--grids", "513,257,8"}).code, 0);
  const auto bad = run_cli({"simulate", "--config", path, "--grids", "512,257,8"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("error[config]"), std::string::npos);
  EXPECT_EQ(run_cli({"simulate", "--config", path, "--grids", "513,x,8"}).code, 2);
}

TEST(Cli, NegativeVarianceExitsThree) {
  TempDir dir;
  auto j = json::parse(kReference);
  j["arm1"]["medium"]["beta"] = json::array({0, -2});
  j["arm1"]["medium"]["k0"] = json::array({15, 100});
  const auto r = run_cli({"simulate", "--config", dir.write("c.json", j.dump())});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("lossyhom: error[numeric]:", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("beta"), std::string::npos);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, ConfigErrorsExitTwo) {
  TempDir dir;
  auto j = json::parse(kReference);
  j["bogus"] = 1;
  const auto r = run_cli({"simulate", "--config", dir.write("c.json", j.dump())});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bogus"), std::string::npos);
  EXPECT_EQ(run_cli({"simulate", "--config", dir.file("missing.json")}).code, 2);
  EXPECT_EQ(run_cli({"simulate", "--config", dir.write("bad.json", "{not json")}).code, 2);
  EXPECT_EQ(run_cli({"simulate", "--config", dir.write("c2.json", kReference), "--units", "cgs"}).code, 2);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"simulate"}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate", "--config", "x"}).code, 2);
}

TEST(Cli, SweepWritesCsv) {
  TempDir dir;
  const auto path = dir.write("c.json", kReference);
  const auto out = dir.file("rows.csv");
  const auto jsonl = dir.file("rows.jsonl");
  const auto r = run_cli({"sweep", "--config", path, "--oracle", "--out", out, "--jsonl", jsonl});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = read(out);
  EXPECT_EQ(csv.rfind(kCsvHeader, 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
  const auto lines = read(jsonl);
  EXPECT_EQ(std::count(lines.begin(), lines.end(), '\n'), 9);

  const auto stdout_run = run_cli({"sweep", "--config", path});
  EXPECT_EQ(stdout_run.out.rfind(kCsvHeader, 0), 0u);
}

TEST(Cli, SweepWithoutSectionIsConfigError) {
  TempDir dir;
  EXPECT_EQ(run_cli({"sweep", "--config", dir.write("c.json", kSymmetric)}).code, 2);
  EXPECT_EQ(run_cli({"tune", "--config", dir.write("c.json", kSymmetric)}).code, 2);
}

TEST(Cli, TuneRestoresDarkFringe) {
  TempDir dir;
  auto j = json::parse(kReference);
  j["arm2"]["medium"] = {{"k0", {15, 7}}, {"alpha", {1.5, 1.0}}, {"beta", {0, 0}}};
  const auto r = run_cli({"tune", "--config", dir.write("c.json", j.dump())});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto out = json::parse(r.out);
  EXPECT_EQ(out["objective"], "closed_form");
  EXPECT_TRUE(out["feasible"].get<bool>());
  EXPECT_NEAR(out["optimizer"]["x2"].get<double>(), 1.0, 1e-6);
  EXPECT_LT(out["optimizer"]["p_normalized"].get<double>(), 1e-10);
}

TEST(Cli, AdjudicatePicksStableWinner) {
  TempDir dir;
  const auto j = json::parse(R"({
    "units": "natural",
    "source": {"omega_sum": 20, "bandwidth": 1},
    "arm1": {"length": 1, "medium": {"k0": [40, 20], "alpha": [4, 1], "beta": [0, 0.25]}},
    "arm2": {"length": 4, "medium": "vacuum"},
    "oracle": {"freq_points": 1025, "time_points": 513}
  })");
  const auto r = run_cli({"adjudicate", "--config", dir.write("c.json", j.dump())});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto out = json::parse(r.out);
  EXPECT_EQ(out["levels"].size(), 3u);
  EXPECT_EQ(out["levels"][0]["freq_points"], 513);
  EXPECT_EQ(out["levels"][2]["freq_points"], 2049);
  EXPECT_TRUE(out["stable"].get<bool>());
  EXPECT_EQ(out["winner"], "single");
}
