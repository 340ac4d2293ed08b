#include "nosig/scenario_io.hpp"

#include <filesystem>

#include <gtest/gtest.h>

namespace nosig {
namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

TEST(ConfigParse, EmptyObjectGivesDefaults) {
  const ScenarioConfig c = parse_config_text("{}");
  EXPECT_EQ(c, ScenarioConfig{});
  EXPECT_EQ(c.t1, 0.0);
}

TEST(ConfigParse, ReadsEveryKey) {
  const ScenarioConfig c = parse_config_text(R"({
    // comments are allowed
    "n": 64, "hopping": 0.5,
    "O1": [2, 10], "O2": [30, 40], "O3": [50, 60],
    "packet1": {"support": [2, 10], "center": 5.5, "width": 2, "momentum": 0.25},
    "packet2": {"support": [20, 32], "center": 25.5, "width": 3, "momentum": 1.5},
    "statistics": "boson", "kick_mode": "label1", "joint_mode": "localized_bell",
    "detector_mode": "label2", "t1": 1.5, "t2": 4, "eps": 1e-7, "selective_o3": true
  })");
  EXPECT_EQ(c.n, 64);
  EXPECT_EQ(c.hopping, 0.5);
  EXPECT_EQ(c.O2, (Region{30, 40}));
  EXPECT_EQ(c.packet1, (PacketSpec{{2, 10}, 5.5, 2.0, 0.25}));
  EXPECT_EQ(c.statistics, Statistics::boson);
  EXPECT_EQ(c.kick_mode, KickMode::label1);
  EXPECT_EQ(c.joint_mode, JointMode::localized_bell);
  EXPECT_EQ(c.detector_mode, DetectorMode::label2);
  EXPECT_EQ(c.t1, 1.5);
  EXPECT_EQ(c.eps, 1e-7);
  EXPECT_TRUE(c.selective_o3);
}

TEST(ConfigParse, PartialPacketKeepsDefaults) {
  const ScenarioConfig c = parse_config_text(R"({"packet2": {"momentum": 1.0}})");
  EXPECT_EQ(c.packet2.support, ScenarioConfig{}.packet2.support);
  EXPECT_EQ(c.packet2.momentum, 1.0);
}

TEST(ConfigParse, InvariantViolationsAreValidationErrors) {
  EXPECT_EQ(error_of(R"({"O1": [8, 20], "O3": [15, 30]})"), "O1, O3 disjoint");
  EXPECT_EQ(error_of(R"({"t2": -1})"), "t2 >= 0");
  EXPECT_THROW(parse_config_text(R"({"t2": -1})"), ValidationError);
}

TEST(ConfigParse, ErrorsNameTheKey) {
  EXPECT_EQ(error_of(R"({"n": 96, "bogus": 1})"), "unknown key 'bogus'");
  EXPECT_EQ(error_of(R"({"packet1": {"centre": 1}})"), "unknown key 'packet1.centre'");
  EXPECT_NE(error_of(R"({"n": 9.5})").find("'n'"), std::string::npos);
  EXPECT_NE(error_of(R"({"O1": [1]})").find("'O1'"), std::string::npos);
  EXPECT_NE(error_of(R"({"statistics": "anyon"})").find("anyon"), std::string::npos);
  EXPECT_NE(error_of(R"({"selective_o3": 1})").find("selective_o3"), std::string::npos);
  EXPECT_THROW(parse_config_text("[]"), ConfigParseError);
}

TEST(ConfigParse, SyntaxErrorReportsLine) {
  const std::string msg = error_of("{\n  \"n\": 96,\n  \"t1\": ,\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(ConfigText, RoundTrips) {
  ScenarioConfig c;
  c.statistics = Statistics::distinguishable;
  c.kick_mode = KickMode::label1;
  c.joint_mode = JointMode::global_bell;
  c.t1 = 0.125;
  c.packet2.momentum = 1.0 / 3.0;
  EXPECT_EQ(parse_config_text(config_to_text(c)), c);
}

SignalingReport sample_report() {
  SignalingReport r;
  r.p_q1_kick = 0.1 / 3.0;
  r.p_q1_nokick = 0.49317812345678901;
  r.delta = r.p_q1_nokick - r.p_q1_kick;
  r.arrival_prob = 0.986356;
  r.certificate = {1e-6, 1.5e-14, 2.25e-15, 0.0, 0.0, true};
  r.max_antisym_violation = 3e-17;
  r.branch_count_kick = 1;
  r.branch_count_nokick = 2;
  return r;
}

TEST(ReportText, RoundTripsExactly) {
  const SignalingReport r = sample_report();
  const RunManifest m{ScenarioConfig{}, tool_version(), 0.25, 42};
  const ParsedReport back = parse_report_text(report_to_text(r, m));
  EXPECT_EQ(back.report, r);
  EXPECT_EQ(back.manifest.config, m.config);
  EXPECT_EQ(back.manifest.tool_version, m.tool_version);
  EXPECT_EQ(back.manifest.wall_clock_seconds, 0.25);
  EXPECT_EQ(back.manifest.seed, 42u);
}

TEST(ReportText, HasExactlyTheReportFields) {
  const std::string text = report_to_text(sample_report(), {ScenarioConfig{}, "x", 0.0, 0});
  for (const char* key : {"p_q1_kick", "p_q1_nokick", "delta", "arrival_prob", "certificate",
                          "max_antisym_violation", "branch_count_kick", "branch_count_nokick",
                          "manifest", "leak_13", "overlap_O3"}) {
    EXPECT_NE(text.find(std::string("\"") + key + "\""), std::string::npos) << key;
  }
  EXPECT_THROW(parse_report_text(R"({"delta": 0})"), ConfigParseError);
}

TEST(ReportText, DeterministicApartFromWallClock) {
  const ScenarioConfig c;
  const SignalingReport a = run_scenario(c, {.threads = 1});
  const SignalingReport b = run_scenario(c, {.threads = 1});
  EXPECT_EQ(report_to_text(a, {c, tool_version(), 1.0, 7}),
            report_to_text(b, {c, tool_version(), 1.0, 7}));
}

TEST(CertificateText, ContainsEveryField) {
  const std::string text = certificate_to_text({1e-6, 0.5, 0.25, 0.0, 1.0, false});
  for (const char* key : {"epsilon", "leak_13", "leak_31", "overlap_O1", "overlap_O3", "pass"}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

TEST(Files, MissingFileIsAnIoError) {
  EXPECT_THROW(read_text_file("/nonexistent/dir/config.json"), IoError);
  EXPECT_THROW(parse_config("/nonexistent/dir/config.json"), IoError);
  EXPECT_THROW(write_text_file("/nonexistent/dir/out.json", "{}"), IoError);
}

TEST(Files, WriteThenRead) {
  const auto path = std::filesystem::temp_directory_path() / "nosig_io_test.json";
  write_text_file(path, config_to_text(ScenarioConfig{}));
  EXPECT_EQ(parse_config(path), ScenarioConfig{});
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace nosig
