#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli_runner.hpp"
#include "tmpdir.hpp"

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_.write("spec.json", R"({"num_labels": 4, "num_samples": 90, "feature_dim": 6, "seed": 3,
                               "profile": {"kind": "geometric", "base": 0.6, "rate": 0.6}})");
    dir_.write("config.json", R"({"epochs": 3, "batch_size": 16, "seed": 2, "hidden_dim": 8, "output_dim": 4})");
    const auto r = run_cli({"synth", "--spec", p("spec.json"), "--out-prefix", p("toy_")});
    ASSERT_EQ(r.status, 0) << r.output;
  }

  std::string p(const std::string& name) const { return (dir_.path() / name).string(); }

  TempDir dir_;
};

}  // namespace

TEST_F(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run_cli({"--help"}).status, 0);
  EXPECT_EQ(run_cli({}).status, 2);
  const auto unknown = run_cli({"stats", p("toy_labels.csv"), "--bogus"});
  EXPECT_EQ(unknown.status, 2);
  EXPECT_NE(unknown.output.find("Usage"), std::string::npos) << unknown.output;
  EXPECT_EQ(run_cli({"stats", p("missing.csv")}).status, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).status, 2);
}

TEST_F(Cli, StatsReportsCounts) {
  const auto r = run_cli({"stats", p("toy_labels.csv"), "--top", "2"});
  ASSERT_EQ(r.status, 0) << r.output;
  const auto j = nlohmann::json::parse(r.output);
  EXPECT_EQ(j.at("sample_count"), 90);
  EXPECT_EQ(j.at("labels").size(), 4u);
  EXPECT_LE(j.at("top_intersections").size(), 2u);
}

TEST_F(Cli, MalformedLabelsGiveRowAndColumn) {
  dir_.write("bad.csv", "id,a,b\nx,1,0\ny,0,7\n");
  const auto r = run_cli({"stats", p("bad.csv")});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("row 3:column 3"), std::string::npos) << r.output;

  dir_.write("empty_row.csv", "id,a,b\nx,1,0\ny,0,0\n");
  const auto e = run_cli({"stats", p("empty_row.csv")});
  EXPECT_EQ(e.status, 2);
  EXPECT_NE(e.output.find("empty label set at row 3"), std::string::npos) << e.output;
}

TEST_F(Cli, MalformedConfigIsUsageError) {
  dir_.write("typo.json", R"({"epoch": 3})");
  const auto r = run_cli({"train", "--labels", p("toy_labels.csv"), "--features", p("toy_features.csv"),
                          "--config", p("typo.json"), "--checkpoint", p("ck.json"), "--curve", p("c.csv")});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("epoch"), std::string::npos) << r.output;
}

TEST_F(Cli, TrainWritesCheckpointAndCurve) {
  const auto r = run_cli({"train", "--labels", p("toy_labels.csv"), "--features", p("toy_features.csv"),
                          "--config", p("config.json"), "--checkpoint", p("ck.json"), "--curve", p("curve.csv"),
                          "--epochs", "4"});
  ASSERT_EQ(r.status, 0) << r.output;
  const std::string curve = read_file(p("curve.csv"));
  EXPECT_EQ(curve.rfind("epoch,mean_loss\n", 0), 0u);
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 5);
  const auto ck = nlohmann::json::parse(read_file(p("ck.json")));
  EXPECT_EQ(ck.at("final_epoch"), 4);
}

TEST_F(Cli, NumericalFailureExitsOne) {
  std::string features = "id,f0,f1,f2,f3,f4,f5\n";
  std::ifstream labels(p("toy_labels.csv"));
  std::string line;
  std::getline(labels, line);
  while (std::getline(labels, line)) {
    features += line.substr(0, line.find(',')) + ",1e300,-1e300,1e300,-1e300,1e300,1e300\n";
  }
  dir_.write("huge.csv", features);
  const auto r = run_cli({"train", "--labels", p("toy_labels.csv"), "--features", p("huge.csv"), "--config",
                          p("config.json"), "--checkpoint", p("ck.json"), "--curve", p("c.csv")});
  EXPECT_EQ(r.status, 1) << r.output;

  const auto strict = run_cli({"gradcheck", "--trials", "2", "--tolerance", "0"});
  EXPECT_EQ(strict.status, 1) << strict.output;
}

TEST_F(Cli, GradcheckPasses) {
  const auto r = run_cli({"gradcheck", "--trials", "20", "--seed", "5"});
  ASSERT_EQ(r.status, 0) << r.output;
  const auto j = nlohmann::json::parse(r.output);
  EXPECT_LE(j.at("max_relative_error").get<double>(), 1e-6);
  EXPECT_TRUE(j.at("pass").get<bool>());
}

TEST_F(Cli, EvalOnIdenticalPairSaturates) {
  ASSERT_EQ(run_cli({"train", "--labels", p("toy_labels.csv"), "--features", p("toy_features.csv"), "--config",
                     p("config.json"), "--checkpoint", p("ck.json"), "--curve", p("c.csv")})
                .status,
            0);
  dir_.write("pair_labels.csv", "id,a,b,c,d\nq,0,1,1,0\nr,0,1,1,0\n");
  dir_.write("pair_features.csv", "id,f0,f1,f2,f3,f4,f5\nq,1,2,3,4,5,6\nr,-1,0.5,2,0,1,-3\n");
  const auto r = run_cli({"eval", "--checkpoint", p("ck.json"), "--labels", p("pair_labels.csv"), "--features",
                          p("pair_features.csv"), "--split", "all", "--out", p("report.json")});
  ASSERT_EQ(r.status, 0) << r.output;
  const auto report = nlohmann::json::parse(read_file(p("report.json")));
  EXPECT_EQ(report.at("map_sim_at_k").get<double>(), 100.0);
  EXPECT_EQ(report.at("map_hard").get<double>(), 100.0);
  EXPECT_EQ(report.at("num_queries"), 2);
  EXPECT_EQ(report.at("k_map"), 1);

  const auto wrong_width = run_cli({"eval", "--checkpoint", p("ck.json"), "--labels", p("pair_labels.csv"),
                                    "--features", p("pair_labels.csv"), "--split", "all"});
  EXPECT_EQ(wrong_width.status, 2) << wrong_width.output;
}

TEST_F(Cli, SweepWritesOneRowPerValue) {
  const auto r = run_cli({"sweep", "--param", "tau", "--values", "0.3,0.1,0.2", "--labels", p("toy_labels.csv"),
                          "--features", p("toy_features.csv"), "--config", p("config.json"), "--out",
                          p("sweep.csv")});
  ASSERT_EQ(r.status, 0) << r.output;
  std::istringstream csv(read_file(p("sweep.csv")));
  std::string header, row;
  std::getline(csv, header);
  EXPECT_EQ(header.rfind("param,value,variant,final_loss,map_sim_at_k", 0), 0u);
  std::vector<std::string> rows;
  while (std::getline(csv, row)) rows.push_back(row);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].rfind("tau,0.1,MACL,", 0), 0u);
  EXPECT_EQ(rows[2].rfind("tau,0.3,MACL,", 0), 0u);

  const auto pair = run_cli({"sweep", "--param", "alpha", "--values", "1.5", "--variants", "MACL,MulSupCon",
                             "--labels", p("toy_labels.csv"), "--features", p("toy_features.csv"), "--config",
                             p("config.json")});
  ASSERT_EQ(pair.status, 0) << pair.output;
  EXPECT_NE(pair.output.find("alpha,1.5,MulSupCon,"), std::string::npos);
}
