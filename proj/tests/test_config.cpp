#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "synthlab/config.hpp"

using namespace synthlab;
namespace fs = std::filesystem;

namespace {

RunConfig parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "<test>");
}

const char* kFullConfig = R"(# sample configuration
[data]
path = observed.csv
n = 500

[schema]
var = age continuous missing=-999
var = sex categorical levels=m,f
var = region categorical levels=n,s role=stratum

[plan]
visit_sequence = age sex
method.age = normrank smooth
method.sex = logit
predictors.sex = age
rule = if age < 16 then sex = m
proper = true
M = 3
k = 400
seed = 99
resample_unchanged = true

[sdc]
label = NOT REAL
keys = age sex
topcode.age = 0:90

[analysis]
formula = age ~ sex
model = linear
estimator = T_s
ci_level = 0.9
)";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("synthlab-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(SYNTHLAB_CLI_BINARY) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string observed_csv() {
  std::ostringstream out;
  out << "age,sex,region\n";
  for (int i = 0; i < 120; ++i)
    out << (10 + i % 70) << "," << (i % 2 ? "m" : "f") << ","
        << (i % 3 ? "n" : "s") << "\n";
  return out.str();
}

}  // namespace

TEST(Config, FullConfigRoundTrip) {
  RunConfig cfg = parse_text(kFullConfig);
  EXPECT_EQ(cfg.data_path, "observed.csv");
  EXPECT_EQ(cfg.observed_n, 500);
  ASSERT_TRUE(cfg.has_schema);
  EXPECT_EQ(cfg.schema.size(), 3u);
  EXPECT_EQ(cfg.schema.var("age").missing_codes,
            std::vector<std::string>{"-999"});
  EXPECT_EQ(cfg.schema.var("region").role, VarRole::Stratum);
  EXPECT_EQ(cfg.plan.visit_sequence, (std::vector<std::string>{"age", "sex"}));
  EXPECT_EQ(cfg.plan.methods.at("age").kind, MethodKind::Normrank);
  EXPECT_TRUE(cfg.plan.methods.at("age").smoothing);
  EXPECT_EQ(cfg.plan.predictors.at("sex"), std::vector<std::string>{"age"});
  ASSERT_EQ(cfg.plan.rules.size(), 1u);
  EXPECT_EQ(cfg.plan.rules[0].target, "sex");
  EXPECT_TRUE(cfg.plan.proper);
  EXPECT_EQ(cfg.plan.M, 3);
  EXPECT_EQ(cfg.plan.k, 400);
  EXPECT_EQ(cfg.plan.master_seed, 99u);
  EXPECT_TRUE(cfg.plan.resample_unchanged);
  EXPECT_EQ(cfg.sdc.label_text, "NOT REAL");
  EXPECT_EQ(cfg.sdc.key_variables, (std::vector<std::string>{"age", "sex"}));
  EXPECT_DOUBLE_EQ(*cfg.sdc.topcode.at("age").lower, 0.0);
  EXPECT_DOUBLE_EQ(*cfg.sdc.topcode.at("age").upper, 90.0);
  EXPECT_EQ(cfg.formula, "age ~ sex");
  EXPECT_EQ(cfg.estimator, Estimator::Ts);
  EXPECT_DOUBLE_EQ(cfg.ci_level, 0.9);
}

TEST(Config, UnknownKeysRejectedWithLineNumbers) {
  try {
    parse_text("[data]\npath = x\nbogus = 1\n");
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
  EXPECT_THROW(parse_text("[nope]\na = b\n"), std::invalid_argument);
  EXPECT_THROW(parse_text("key = before_any_section\n"), std::invalid_argument);
  EXPECT_THROW(parse_text("[plan]\nmethod.age = sorcery\n"),
               std::invalid_argument);
  EXPECT_THROW(parse_text("[schema]\nvar = x continuous role=boss\n"),
               std::invalid_argument);
}

TEST(Config, TopcodeBoundSyntax) {
  RunConfig cfg = parse_text("[sdc]\ntopcode.x = -:10\ntopcode.y = 2:-\n");
  EXPECT_FALSE(cfg.sdc.topcode.at("x").lower.has_value());
  EXPECT_DOUBLE_EQ(*cfg.sdc.topcode.at("x").upper, 10.0);
  EXPECT_DOUBLE_EQ(*cfg.sdc.topcode.at("y").lower, 2.0);
  EXPECT_FALSE(cfg.sdc.topcode.at("y").upper.has_value());
  EXPECT_THROW(parse_text("[sdc]\ntopcode.x = 10\n"), std::invalid_argument);
}

TEST(Cli, SynthProducesLabelledDeterministicOutput) {
  TempDir dir;
  write_file(dir.path / "obs.csv", observed_csv());
  std::string config =
      "[data]\npath = " + (dir.path / "obs.csv").string() +
      "\n[schema]\n"
      "var = age continuous\n"
      "var = sex categorical levels=m,f\n"
      "var = region categorical levels=n,s role=keep\n"
      "[plan]\nvisit_sequence = age sex\nmethod.age = normrank\n"
      "method.sex = logit\nM = 2\nseed = 7\n";
  write_file(dir.path / "cfg.ini", config);
  std::string base = "--config " + (dir.path / "cfg.ini").string();
  ASSERT_EQ(run_cli(base + " --out-dir " + (dir.path / "o1").string() + " synth"), 0);
  ASSERT_EQ(run_cli(base + " --out-dir " + (dir.path / "o2").string() + " synth"), 0);
  std::string rep1 = read_file(dir.path / "o1" / "synthetic_1.csv");
  EXPECT_EQ(rep1.rfind("# FALSE DATA", 0), 0u);
  EXPECT_NE(rep1.find("faux_label"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir.path / "o1" / "synthetic_2.csv"));
  // byte-identical determinism across runs
  EXPECT_EQ(rep1, read_file(dir.path / "o2" / "synthetic_1.csv"));
  std::string manifest = read_file(dir.path / "o1" / "manifest.txt");
  EXPECT_NE(manifest.find("label: FALSE DATA"), std::string::npos);
  EXPECT_NE(manifest.find("seed: 7"), std::string::npos);
  // --seed override changes the output
  ASSERT_EQ(run_cli(base + " --seed 8 --out-dir " + (dir.path / "o3").string() + " synth"), 0);
  EXPECT_NE(rep1, read_file(dir.path / "o3" / "synthetic_1.csv"));
}

TEST(Cli, AnalyzeOnSynthesizedReplicates) {
  TempDir dir;
  write_file(dir.path / "obs.csv", observed_csv());
  std::string schema =
      "[schema]\n"
      "var = age continuous\n"
      "var = sex categorical levels=m,f\n"
      "var = region categorical levels=n,s role=keep\n";
  write_file(dir.path / "synth.ini",
             "[data]\npath = " + (dir.path / "obs.csv").string() + "\n" +
                 schema +
                 "[plan]\nvisit_sequence = age sex\nmethod.age = norm\n"
                 "method.sex = logit\nM = 3\nseed = 11\n");
  ASSERT_EQ(run_cli("--config " + (dir.path / "synth.ini").string() +
                    " --out-dir " + dir.path.string() + " synth"), 0);
  write_file(dir.path / "analyze.ini",
             "[data]\nsynthetic = " + (dir.path / "synthetic_1.csv").string() +
                 " " + (dir.path / "synthetic_2.csv").string() + " " +
                 (dir.path / "synthetic_3.csv").string() + "\nn = 120\n" +
                 schema + "[analysis]\nformula = age ~ sex\nmodel = linear\n"
                 "estimator = T_s\n");
  ASSERT_EQ(run_cli("--config " + (dir.path / "analyze.ini").string() +
                    " --out-dir " + dir.path.string() + " analyze"), 0);
  std::string results = read_file(dir.path / "analysis.csv");
  EXPECT_EQ(results.rfind("coefficient,estimate,se,ci_low,ci_high", 0), 0u);
  EXPECT_NE(results.find("sex=f"), std::string::npos);
  EXPECT_NE(results.find("T_s"), std::string::npos);
}

TEST(Cli, CompareAndSdcCommands) {
  TempDir dir;
  write_file(dir.path / "obs.csv", observed_csv());
  std::string schema =
      "[schema]\n"
      "var = age continuous\n"
      "var = sex categorical levels=m,f\n"
      "var = region categorical levels=n,s role=keep\n";
  write_file(dir.path / "synth.ini",
             "[data]\npath = " + (dir.path / "obs.csv").string() + "\n" +
                 schema +
                 "[plan]\nvisit_sequence = age sex\nmethod.age = normrank\n"
                 "method.sex = logit\nM = 1\nseed = 13\n");
  ASSERT_EQ(run_cli("--config " + (dir.path / "synth.ini").string() +
                    " --out-dir " + dir.path.string() + " synth"), 0);
  write_file(dir.path / "post.ini",
             "[data]\npath = " + (dir.path / "obs.csv").string() +
                 "\nsynthetic = " + (dir.path / "synthetic_1.csv").string() +
                 "\n" + schema +
                 "[compare]\nvariables = age sex\nbin_width = 10\n"
                 "[sdc]\nkeys = age sex\ntopcode.age = -:60\n");
  ASSERT_EQ(run_cli("--config " + (dir.path / "post.ini").string() +
                    " --out-dir " + dir.path.string() + " compare"), 0);
  EXPECT_TRUE(fs::exists(dir.path / "marginals_age.csv"));
  EXPECT_TRUE(fs::exists(dir.path / "marginals_sex.csv"));
  ASSERT_EQ(run_cli("--config " + (dir.path / "post.ini").string() +
                    " --out-dir " + dir.path.string() + " sdc"), 0);
  std::string cleaned = read_file(dir.path / "cleaned_1.csv");
  EXPECT_EQ(cleaned.rfind("# FALSE DATA", 0), 0u);
  std::string manifest = read_file(dir.path / "sdc_manifest.txt");
  EXPECT_NE(manifest.find("sdc.topcoded_cells"), std::string::npos);
}

TEST(Cli, SimulateInteractionStudy) {
  TempDir dir;
  write_file(dir.path / "sim.ini",
             "[simulate]\nstudy = interaction\nn_seeds = 3\nseed = 5\n");
  ASSERT_EQ(run_cli("--config " + (dir.path / "sim.ini").string() +
                    " --out-dir " + dir.path.string() + " simulate"), 0);
  std::string results = read_file(dir.path / "simulation_interaction.csv");
  EXPECT_EQ(results.rfind("n_seeds,shrunk,shrinkage_rate", 0), 0u);
  EXPECT_TRUE(fs::exists(dir.path / "simulation_manifest.txt"));
}

TEST(Cli, ErrorsGiveNonzeroExit) {
  TempDir dir;
  write_file(dir.path / "bad.ini", "[data]\nbogus = 1\n");
  EXPECT_NE(run_cli("--config " + (dir.path / "bad.ini").string() + " synth"), 0);
  EXPECT_NE(run_cli("--config " + (dir.path / "missing.ini").string() + " synth"), 0);
  EXPECT_NE(run_cli("synth"), 0);  // --config is required
}
