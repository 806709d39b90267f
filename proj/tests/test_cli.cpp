#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "entrolab/cli.hpp"

using namespace entrolab;
namespace fs = std::filesystem;

namespace {

int run_cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "entrolab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream err;
  const int rc = cli::run(static_cast<int>(argv.size()), argv.data(), err);
  if (err_text) *err_text = err.str();
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("entrolab_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

const char* kSmallShock = R"(# small stationary shock
flux = burgers
entropy = quadratic
[grid]
nt = 20
nx = 400
[window]
ta = 0
tb = 1
xa = -1
xb = 1
[psi]
tc = 0.5
xc = 0
rt = 0.4
rx = 0.5
)";

}  // namespace

TEST(ConfigTest, SectionsCommentsAndOverrides) {
  Config cfg;
  cfg.load_text("flux = burgers  # trailing\n\n[grid]\nnx = 64\n[psi]\n rt = 0.25\n");
  EXPECT_EQ(cfg.str("flux"), "burgers");
  EXPECT_EQ(cfg.integer("grid.nx", 1), 64);
  EXPECT_DOUBLE_EQ(cfg.num("psi.rt"), 0.25);
  cfg.set("grid.nx=128");
  EXPECT_EQ(cfg.integer("grid.nx", 1), 128);
  EXPECT_DOUBLE_EQ(cfg.num("grid.t1", 2.5), 2.5);
  EXPECT_EQ(cfg.str("grid.t1"), "2.5");  // defaults are recorded
  cfg.set("ladder.eps", "0.1, 0.2");
  EXPECT_EQ(cfg.list("ladder.eps"), (std::vector<double>{0.1, 0.2}));
}

TEST(ConfigTest, Errors) {
  Config cfg;
  EXPECT_THROW(cfg.load_text("no equals sign\n"), ConfigError);
  EXPECT_THROW(cfg.load_text("[broken\n"), ConfigError);
  EXPECT_THROW(cfg.set("novalue"), ConfigError);
  EXPECT_THROW(cfg.str("missing"), ConfigError);
  cfg.set("x=abc");
  EXPECT_THROW(cfg.num("x"), ConfigError);
  cfg.set("n=2.5");
  EXPECT_THROW(cfg.integer("n", 1), ConfigError);
  EXPECT_THROW(cfg.load_file("/nonexistent/entrolab.cfg"), ConfigError);
}

TEST(FluxSpecParsing, FluxAndEntropy) {
  EXPECT_EQ(parse_flux("burgers").family(), FluxFamily::quadratic);
  EXPECT_EQ(parse_flux(" power:beta=2 ").beta(), 2.0);
  EXPECT_NO_THROW(parse_flux("poly:0,0,0.5"));
  EXPECT_NO_THROW(parse_flux("exp"));
  EXPECT_THROW(parse_flux("cubic"), ConfigError);
  EXPECT_THROW(parse_flux("power:beta=x"), ConfigError);
  EXPECT_THROW(parse_flux("poly:1,2"), ConfigError);
  EXPECT_NO_THROW(parse_entropy("quadratic"));
  EXPECT_DOUBLE_EQ(parse_entropy("poly:0,0,0,1").d2(2.0), 12.0);
  EXPECT_THROW(parse_entropy("kruzhkov"), ConfigError);
}

TEST(FieldCsv, RoundTripIsExact) {
  const auto f = riemann_field(FluxFunction::burgers(), 0.0, 1.0, GridSpec{0.1, 1, 3, -1, 1, 5});
  std::stringstream ss;
  write_field_csv(ss, f, "burgers");
  const auto back = read_field_csv(ss);
  EXPECT_EQ(back.flux_spec, "burgers");
  EXPECT_EQ(back.grid.nx, 5);
  EXPECT_EQ(back.grid.t0, 0.1);
  EXPECT_EQ(back.values, f.values());
}

TEST(FieldCsv, RejectsMalformedInput) {
  std::stringstream no_header("1,2\n3,4\n");
  EXPECT_THROW(read_field_csv(no_header), ConfigError);
  std::stringstream short_row("# grid 0 1 2 0 1 2\n1,2\n3\n");
  EXPECT_THROW(read_field_csv(short_row), ConfigError);
  std::stringstream missing_row("# grid 0 1 2 0 1 2\n1,2\n");
  EXPECT_THROW(read_field_csv(missing_row), ConfigError);
}

TEST(JumpSidecar, RoundTrip) {
  const auto f = rh_jump_field(FluxFunction::burgers(), 1.0, 0.0, GridSpec{0, 1, 4, -1, 1, 8});
  const auto back = jumps_from_json(jumps_to_json(f.jumps()));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].p0.x, f.jumps()[0].p0.x);
  EXPECT_EQ(back[0].nu.t, f.jumps()[0].nu.t);
  EXPECT_EQ(back[0].u_minus, 1.0);
  EXPECT_THROW(jumps_from_json(Json::parse(R"([{"p0": [0]}])")), ConfigError);
}

TEST(Cli, UsageErrorsExitOne) {
  std::string err;
  EXPECT_EQ(run_cli({}, &err), 1);
  EXPECT_EQ(run_cli({"bogus"}, &err), 1);
  EXPECT_EQ(run_cli({"delta", "--flux", "cubic", "--u1", "0", "--u2", "1"}, &err), 1);
  EXPECT_NE(err.find("expected"), std::string::npos);
  EXPECT_EQ(run_cli({"functional", "--config", "/nonexistent.cfg"}, &err), 1);
  EXPECT_EQ(run_cli({"functional", "--set", "field.generator=wat"}, &err), 1);
}

TEST(Cli, DeltaPrintsBareValue) {
  ::testing::internal::CaptureStdout();
  const int rc = run_cli({"delta", "--flux", "burgers", "--u1", "0", "--u2", "1"});
  const std::string out = ::testing::internal::GetCapturedStdout();
  EXPECT_EQ(rc, 0);
  EXPECT_NEAR(std::stod(out), 1.0 / 6.0, 1e-15);
}

TEST_F(TempDir, JumpCostCampaignPasses) {
  const auto out = dir_ / "lemma.json";
  EXPECT_EQ(run_cli({"lemma", "--flux", "power:beta=2", "--entropy", "poly:0,0,0,0,1", "--samples", "200", "--out",
                     out.string()}),
            0);
  const auto j = Json::parse(slurp(out));
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_LE(j["max_ratio"].get<double>(), 1.0 + 1e-6);
}

TEST_F(TempDir, VerifyReportsAreByteStable) {
  const auto cfg = write("shock.cfg", kSmallShock);
  const auto a = dir_ / "a.json", b = dir_ / "b.json";
  ASSERT_EQ(run_cli({"verify", "--config", cfg.string(), "--out", a.string()}), 0);
  ASSERT_EQ(run_cli({"verify", "--config", cfg.string(), "--out", b.string()}), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  const auto j = Json::parse(slurp(a));
  EXPECT_NEAR(j["C0_empirical"].get<double>(), 0.5, 1e-12);
  EXPECT_NEAR(j["jump_abs"].get<double>(), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(j["config"]["grid.nx"], "400");
}

TEST_F(TempDir, InvariantViolationExitsTwo) {
  const auto cfg = write("shock.cfg", kSmallShock);
  std::string err;
  EXPECT_EQ(run_cli({"verify", "--config", cfg.string(), "--set", "c0_cap=0.1", "--out", (dir_ / "v.json").string()},
                    &err),
            2);
  const auto j = Json::parse(slurp(dir_ / "v.json"));
  EXPECT_FALSE(j["passed"].get<bool>());
}

TEST_F(TempDir, NamedFlagsOverrideConfig) {
  const auto cfg = write("shock.cfg", kSmallShock);
  const auto out = dir_ / "f.json";
  ASSERT_EQ(run_cli({"functional", "--config", cfg.string(), "--nx", "800", "--out", out.string()}), 0);
  EXPECT_EQ(Json::parse(slurp(out))["config"]["grid.nx"], "800");
}

TEST_F(TempDir, SolveThenAnalyseFromFile) {
  const auto field = dir_ / "field.csv", jumps = dir_ / "jumps.json";
  ASSERT_EQ(run_cli({"solve", "--set", "field.generator=shock", "--set", "grid.nx=400", "--set", "grid.nt=20",
                     "--out", field.string(), "--jumps", jumps.string()}),
            0);
  const auto cfg = write("file.cfg", std::string("[field]\ngenerator = file\npath = ") + field.string() +
                                         "\njumps = " + jumps.string() + "\n[window]\nta = 0\ntb = 1\nxa = -1\nxb = 1\n");
  const auto out = dir_ / "p.json", csv = dir_ / "p.csv";
  ASSERT_EQ(run_cli({"production", "--config", cfg.string(), "--set", "psi.xc=0", "--set", "psi.rx=0.5", "--out",
                     out.string(), "--csv", csv.string()}),
            0);
  const auto j = Json::parse(slurp(out));
  EXPECT_NEAR(j["jump_abs"].get<double>(), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(slurp(csv).rfind("eps,term1,term2,total,bound\n", 0), 0u);
}
