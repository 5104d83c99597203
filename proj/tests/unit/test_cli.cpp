#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <memory>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "ahtlab/network.hpp"
#include "ahtlab/policies.hpp"
#include "ahtlab/sim.hpp"
#include "ahtlab_cli/artifacts.hpp"
#include "ahtlab_cli/commands.hpp"
#include "ahtlab_cli/model_file.hpp"
#include "support/fixtures.hpp"

namespace ahtlab::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Workdir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("ahtlab_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the executable; returns the exit status and captures stdout.
  int run(const std::string& args, std::string* stdout_text = nullptr) {
    const fs::path out = dir_ / "stdout.txt";
    const std::string cmd = std::string(AHTLAB_EXE) + " " + args + " > " + out.string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    if (stdout_text) *stdout_text = slurp(out);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string stderr_text() const { return slurp(dir_ / "stderr.txt"); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const char* kValidModel = R"({
  "format": "ahtlab-model/1",
  "name": "coin",
  "hypotheses": ["fair", "biased"],
  "queries": ["flip"],
  "observations": ["heads", "tails"],
  "probabilities": {
    "fair": {"flip": [0.5, 0.5]},
    "biased": {"flip": [0.9, 0.1]}
  },
  "prior": [0.25, 0.75]
})";

// --- model files ----------------------------------------------------------

TEST(ModelFile, ParsesLabelsRowsAndPrior) {
  const auto spec = parse_model(kValidModel);
  EXPECT_EQ(spec.name, "coin");
  EXPECT_EQ(spec.hypotheses, (std::vector<std::string>{"fair", "biased"}));
  EXPECT_EQ(spec.model.num_queries(), 1u);
  EXPECT_EQ(spec.model.probability(1, 0, 0), 0.9);
  EXPECT_NEAR(spec.prior_belief().probability(1), 0.75, 1e-15);
}

TEST(ModelFile, SyntaxErrorReportsLineAndColumn) {
  const std::string text = "{\n  \"format\": \"ahtlab-model/1\",\n  \"name\": oops\n}";
  try {
    parse_model(text, "bad.json");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 11u);
    EXPECT_NE(std::string(e.what()).find("bad.json:3:11"), std::string::npos);
  }
}

TEST(ModelFile, RowSumViolationNamesTheRow) {
  std::string text = kValidModel;
  text.replace(text.find("[0.9, 0.1]"), 10, "[0.8, 0.1]");
  try {
    parse_model(text);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("(h=1, u=0)"), std::string::npos) << e.what();
  }
}

TEST(ModelFile, StructuralErrors) {
  auto broken = [](const std::string& from, const std::string& to) {
    std::string t = kValidModel;
    t.replace(t.find(from), from.size(), to);
    return t;
  };
  EXPECT_THROW(parse_model(broken("ahtlab-model/1", "other/2")), ValidationError);
  EXPECT_THROW(parse_model(broken("\"flip\": [0.5, 0.5]", "\"flop\": [0.5, 0.5]")),
               ValidationError);
  EXPECT_THROW(parse_model(broken("[0.5, 0.5]", "[0.5, 0.25, 0.25]")), ValidationError);
  EXPECT_THROW(parse_model(broken("[0.25, 0.75]", "[0.5, 0.6]")), ValidationError);
  EXPECT_THROW(parse_model(broken("[\"fair\", \"biased\"]", "[\"fair\", \"fair\"]")),
               ValidationError);
  EXPECT_THROW(parse_model(broken("[0.5, 0.5]", "[0.5, \"x\"]")), ValidationError);
}

TEST(ModelFile, PresetsMatchReferenceTables) {
  const auto s1 = preset("setup1");
  EXPECT_EQ(s1.model, testing::setup1_model());
  EXPECT_EQ(s1.model.num_hypotheses(), 3u);
  EXPECT_EQ(s1.model.num_queries(), 2u);
  const auto s2 = preset("setup2");
  EXPECT_EQ(s2.model, testing::setup2_model());
  EXPECT_EQ(s2.model.num_queries(), 4u);
  EXPECT_EQ(s2.model.probability(1, 2, 0), 1 - testing::kDelta);
  EXPECT_EQ(s2.model.probability(1, 2, 1), testing::kDelta);
  EXPECT_THROW(preset("setup3"), ValidationError);
}

TEST(ModelFile, PresetsRoundTripThroughText) {
  for (const auto& name : preset_names()) {
    const auto spec = preset(name);
    const auto back = parse_model(dump_model(spec));
    EXPECT_EQ(back.model, spec.model);
    EXPECT_EQ(back.queries, spec.queries);
    EXPECT_EQ(dump_model(back), dump_model(spec));
  }
}

TEST(ModelFile, ShippedPresetFilesMatchBuiltins) {
  for (const auto& name : preset_names()) {
    const auto loaded = load_model(std::string(AHTLAB_PRESET_DIR) + "/" + name + ".json");
    EXPECT_EQ(loaded.spec.model, preset(name).model) << name;
    EXPECT_EQ(loaded.text, dump_model(preset(name))) << name;
  }
}

// --- artifacts ---------------------------------------------------------------

TEST(Artifacts, NumberFormatting) {
  EXPECT_EQ(format_number(0.415888308336), "0.415888308");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(-2.5e-12), "-2.5e-12");
  EXPECT_EQ(format_number(123456789.4), "123456789");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Artifacts, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Artifacts, SvgListsSeriesInOrderWithBoundLine) {
  RateCurve c;
  c.hypothesis = 0;
  c.horizon = {1, 2, 3};
  c.mean_rate = {0.1, 0.2, 0.3};
  c.std_error = {0, 0, 0};
  c.bound = 0.4;
  const auto svg = rate_chart_svg({{"heu", c}, {"ejs", c}, {"ope", c}}, "t");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  const auto heu = svg.find(">heu (h0)<"), ejs = svg.find(">ejs (h0)<"),
             ope = svg.find(">ope (h0)<");
  ASSERT_NE(heu, std::string::npos);
  EXPECT_LT(heu, ejs);
  EXPECT_LT(ejs, ope);
  std::size_t polylines = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1))
    ++polylines;
  EXPECT_EQ(polylines, 3u);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
}

// --- executable ----------------------------------------------------------------

TEST_F(Workdir, SolveGameSetup1) {
  std::string text;
  ASSERT_EQ(run("solve-game -m setup1 --all -o " + path("g.csv"), &text), 0);
  EXPECT_NE(text.find("h0: R* = 0.415888308"), std::string::npos) << text;
  EXPECT_NE(text.find("h1: R* = 0.831776617"), std::string::npos) << text;
  const auto csv = slurp(path("g.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "hypothesis,query,alpha,value");
  EXPECT_NE(csv.find("0,0,0.5,0.415888308"), std::string::npos);
  const auto manifest = slurp(path("g.csv.manifest.json"));
  EXPECT_NE(manifest.find(sha256_hex(dump_model(preset("setup1")))), std::string::npos);
}

TEST_F(Workdir, SolveGameDegenerateModelIsZero) {
  std::ofstream(path("flat.json")) << R"({"format": "ahtlab-model/1",
    "hypotheses": ["a", "b"], "queries": ["q"], "observations": ["0", "1"],
    "probabilities": {"a": {"q": [0.3, 0.7]}, "b": {"q": [0.3, 0.7]}}})";
  std::string text;
  ASSERT_EQ(run("solve-game -m " + path("flat.json") + " --hypothesis 0", &text), 0);
  EXPECT_NE(text.find("a: R* = 0 nats"), std::string::npos) << text;
}

TEST_F(Workdir, InvalidModelFileIsReported) {
  std::string text = kValidModel;
  text.replace(text.find("[0.9, 0.1]"), 10, "[0.8, 0.1]");
  std::ofstream(path("bad.json")) << text;
  EXPECT_EQ(run("solve-game -m " + path("bad.json")), 1);
  EXPECT_NE(stderr_text().find("(h=1, u=0)"), std::string::npos) << stderr_text();
}

TEST_F(Workdir, DumpPresetRoundTrip) {
  ASSERT_EQ(run("dump-preset setup2 -o " + path("s2.json")), 0);
  EXPECT_EQ(load_model(path("s2.json")).spec.model, preset("setup2").model);
  EXPECT_EQ(run("dump-preset nope"), 2);
}

TEST_F(Workdir, EvaluateIsByteReproducible) {
  const std::string args = "evaluate -m setup2 -p ejs,heu --all -N 40 -e 300 -s 5 --svg " +
                           path("c.svg") + " -o ";
  ASSERT_EQ(run(args + path("a.csv")), 0);
  ASSERT_EQ(run(args + path("b.csv") + " -j 3"), 0);
  const auto a = slurp(path("a.csv"));
  EXPECT_EQ(a, slurp(path("b.csv")));
  EXPECT_EQ(a.substr(0, a.find('\n')), "policy,hypothesis,n,mean_rate,stderr,bound");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 2 * 3 * 40);
  EXPECT_TRUE(fs::exists(path("c.svg")));
  EXPECT_TRUE(fs::exists(path("a.csv.manifest.json")));
}

TEST_F(Workdir, EvaluateWithoutSvgFlagWritesNoChart) {
  ASSERT_EQ(run("evaluate -m setup1 -p random -N 10 -e 20 -o " + path("r.csv")), 0);
  for (const auto& entry : fs::directory_iterator(dir_))
    EXPECT_NE(entry.path().extension(), ".svg");
}

TEST_F(Workdir, EvaluateQuickUsesThousandEpisodes) {
  ASSERT_EQ(run("evaluate -m setup1 -p ejs --hypothesis 1 -N 5 --quick -o " + path("q.csv")), 0);
  EXPECT_NE(slurp(path("q.csv.manifest.json")).find("\"episodes\": 1000"), std::string::npos);
}

TEST_F(Workdir, CompareSinglePolicyMatchesEvaluate) {
  ASSERT_EQ(run("evaluate -m setup1 -p heu --hypothesis 0 -N 30 -e 200 -s 9 -o " + path("e.csv")), 0);
  std::string summary;
  ASSERT_EQ(run("compare -m setup1 -p heu --hypothesis 0 -N 30 -e 200 -s 9 -o " + path("c.csv"),
                &summary),
            0);
  EXPECT_EQ(slurp(path("e.csv")), slurp(path("c.csv")));
  EXPECT_NE(summary.find("ratio"), std::string::npos);
}

TEST_F(Workdir, CompareWithoutPoliciesIsUsageError) {
  EXPECT_EQ(run("compare -m setup1 -N 10 -e 10"), 2);
  EXPECT_EQ(run("evaluate -m setup1 -p bogus -N 10 -e 10"), 2);
  EXPECT_EQ(run("evaluate -m setup1 -p dqn -N 10 -e 10"), 2);
  EXPECT_EQ(run("evaluate -m setup1 -p ope --rho-bar 0.2 -N 10 -e 10"), 2);
}

TEST_F(Workdir, TrainZeroEpisodes) {
  ASSERT_EQ(run("train -m setup1 -e 0 -o " + path("net.txt")), 0);
  const auto net = load_network(fs::path(path("net.txt")));
  EXPECT_EQ(net.input_size(), 6u);
  EXPECT_EQ(net.output_size(), 2u);
  EXPECT_EQ(slurp(path("net.txt.log.csv")), "episode,hypothesis,cumulative_reward,mean_loss\n");
  EXPECT_TRUE(fs::exists(path("net.txt.manifest.json")));
}

TEST_F(Workdir, TrainIsSeedDeterministicAndRoundTrips) {
  const std::string args = "train -m setup1 -e 20 -N 20 --hidden 16 -q -s 4 -o ";
  ASSERT_EQ(run(args + path("a.txt")), 0);
  ASSERT_EQ(run(args + path("b.txt")), 0);
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("b.txt")));
  EXPECT_EQ(slurp(path("a.txt.log.csv")), slurp(path("b.txt.log.csv")));

  const auto net = load_network(fs::path(path("a.txt")));
  std::stringstream again;
  save_network(net, again);
  EXPECT_EQ(again.str(), slurp(path("a.txt")));
  EXPECT_EQ(run("evaluate -m setup1 -p dqn --network " + path("a.txt") + " -N 10 -e 10"), 0);
}

TEST_F(Workdir, TrainingImprovesGreedyPolicy) {
  // Short run; the greedy policy of the trained network must clearly beat
  // the greedy policy of its own random initialization under h0.
  ASSERT_EQ(run("train -m setup1 -e 150 -q -o " + path("t.txt")), 0);
  ASSERT_EQ(run("train -m setup1 -e 0 -q -o " + path("i.txt")), 0);
  const auto model = preset("setup1").model;
  auto rate = [&](const std::string& file) {
    DqnGreedyPolicy p(std::make_shared<QNetwork>(load_network(fs::path(file))));
    return evaluate_policy(p, model, Belief::uniform(3), 0, 200, 1000, 7).mean_rate.back();
  };
  const double trained = rate(path("t.txt")), initial = rate(path("i.txt"));
  EXPECT_GT(trained, initial + 0.05) << "trained " << trained << " initial " << initial;
  EXPECT_GE(trained, 0.7 * 0.415888);
}

TEST_F(Workdir, HelpAndUnknownOptions) {
  std::string text;
  EXPECT_EQ(run("--help", &text), 0);
  for (const char* sub : {"solve-game", "train", "evaluate", "compare", "dump-preset"})
    EXPECT_NE(text.find(sub), std::string::npos) << sub;
  EXPECT_EQ(run("evaluate --nonsense"), 2);
  EXPECT_EQ(run(""), 2);
}

}  // namespace
}  // namespace ahtlab::cli
