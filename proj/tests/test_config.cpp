#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "strobo/commands.hpp"
#include "strobo/config.hpp"
#include "strobo/error.hpp"
#include "test_support.hpp"

using namespace strobo;
using namespace strobo::testing;

namespace fs = std::filesystem;

namespace {

std::string fixtures_dir() {
  const char* env = std::getenv("STROBO_FIXTURES");
  return env ? env : STROBO_FIXTURE_DIR;
}

std::string fixture(const std::string& name) { return fixtures_dir() + "/" + name + ".json"; }

json base_config() { return json::parse(preset_text("qubit-sigma-y")); }

std::string config_error_message(const json& j) {
  try {
    config_from_json(j);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    return e.what();
  }
  ADD_FAILURE() << "config accepted: " << j.dump();
  return {};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const json* projector_entry(const json& results, const std::string& section, const std::string& label, std::size_t nth) {
  std::size_t seen = 0;
  for (const auto& r : results.at(section)) {
    if (r.at("projector") == label && seen++ == nth) return &r;
  }
  return nullptr;
}

}  // namespace

TEST(Config, PresetMatchesShippedFixture) {
  EXPECT_EQ(load_config("preset:qubit-sigma-y"), load_config(fixture("qubit-sigma-y")));
  EXPECT_EQ(preset_names(), std::vector<std::string>{"qubit-sigma-y"});
}

TEST(Config, RoundTripShippedFixtures) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(fixtures_dir())) {
    if (entry.path().extension() != ".json") continue;
    const auto c = load_config(entry.path().string());
    const auto again = config_from_json(config_to_json(c));
    EXPECT_EQ(c, again) << entry.path();
    EXPECT_EQ(dump(config_to_json(c)), dump(config_to_json(again)));
    ++count;
  }
  EXPECT_GE(count, 5);
}

TEST(Config, BuildsObjects) {
  const auto c = load_config("preset:qubit-sigma-y");
  EXPECT_EQ(c.dimension, 2);
  EXPECT_LT((c.build_hamiltonian().entries() - sigma_y().entries()).norm(), 1e-15);
  const auto ps = c.build_projectors();
  ASSERT_EQ(ps.size(), 2u);
  EXPECT_NEAR(fidelity(ps[1].direction, qubit_projectors()[1].direction), 1.0, 1e-15);
  ASSERT_TRUE(c.build_truth().has_value());
  EXPECT_EQ(c.seed, 7u);
  EXPECT_FALSE(c.shots.has_value());
  EXPECT_EQ(c.mode, ReconstructionMode::Factored);
}

TEST(Config, HamiltonianPresetsAndMatrices) {
  auto j = base_config();
  j["hamiltonian"] = "diag:[0.5, -1]";
  EXPECT_NEAR(config_from_json(j).build_hamiltonian().entries()(1, 1).real(), -1.0, 1e-15);
  j["hamiltonian"] = json::array({json::array({json::array({1, 0}), json::array({0, -1})}),
                                  json::array({json::array({0, 1}), json::array({2, 0})})});
  const auto h = config_from_json(j).build_hamiltonian();
  EXPECT_EQ(h.entries()(0, 1), Complex(0.0, -1.0));
  for (const char* name : {"sigma_x", "sigma_z", "identity"}) {
    j["hamiltonian"] = name;
    EXPECT_NO_THROW(config_from_json(j).build_hamiltonian());
  }
}

TEST(Config, AutoTimes) {
  auto j = base_config();
  j["times"] = {{"auto", {{"horizon", kPi}, {"grid", 64}}}};
  const auto c = config_from_json(j);
  const auto ts = c.resolve_times(minimal_polynomial(c.build_hamiltonian()));
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_NEAR(ts[1], kPi / 2, 1e-12);
}

TEST(Config, ErrorsNameTheField) {
  auto j = base_config();
  j["projectors"][1]["vector"] = json::array({json::array({1, 0})});
  EXPECT_NE(config_error_message(j).find("projectors[1].vector"), std::string::npos);

  j = base_config();
  j["colour"] = "blue";
  EXPECT_NE(config_error_message(j).find("colour"), std::string::npos);

  j = base_config();
  j["shots"] = 0;
  EXPECT_NE(config_error_message(j).find("shots"), std::string::npos);

  j = base_config();
  j["shots"] = "many";
  EXPECT_NE(config_error_message(j).find("shots"), std::string::npos);

  j = base_config();
  j["hamiltonian"] = "sigma_w";
  EXPECT_NE(config_error_message(j).find("hamiltonian"), std::string::npos);

  j = base_config();
  j["hamiltonian"] = json::array({json::array({json::array({0, 0}), json::array({1, 0})}),
                                  json::array({json::array({0, 0}), json::array({0, 0})})});
  EXPECT_NE(config_error_message(j).find("hamiltonian"), std::string::npos);

  j = base_config();
  j["mode"] = "fast";
  EXPECT_NE(config_error_message(j).find("mode"), std::string::npos);

  j = base_config();
  j["truth"] = {{"bloch", {{"theta", 4.0}, {"phi", 0.0}}}};
  EXPECT_NE(config_error_message(j).find("truth.bloch"), std::string::npos);

  j = base_config();
  j["projectors"][0]["label"] = "M2";
  EXPECT_NE(config_error_message(j).find("projectors[1].label"), std::string::npos);

  j = base_config();
  j.erase("dimension");
  EXPECT_NE(config_error_message(j).find("dimension"), std::string::npos);

  j = base_config();
  j["times"] = json::array();
  EXPECT_NE(config_error_message(j).find("times"), std::string::npos);
}

TEST(Config, MalformedTextAndMissingFile) {
  try {
    parse_config_text("{\"dimension\": 2,");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
  }
  EXPECT_THROW(load_config("/nonexistent/config.json"), Error);
  EXPECT_THROW(load_config("preset:nope"), Error);
}

TEST(Records, RoundTripAndValidation) {
  const std::vector<MeasurementRecord> rs = {{"M1", 0.0, 0.2, std::nullopt}, {"M2", 0.5, 0.25, 1000}};
  EXPECT_EQ(records_from_json(records_to_json(rs)), rs);
  auto j = records_to_json(rs);
  j[1]["value"] = 1.5;
  EXPECT_THROW(records_from_json(j), Error);
  j = records_to_json(rs);
  j[0].erase("time");
  EXPECT_THROW(records_from_json(j), Error);
}

TEST(Dump, NewlineTerminated) {
  const auto s = dump(json{{"a", 1}});
  EXPECT_EQ(s.back(), '\n');
  EXPECT_NE(s.find("\n  \"a\""), std::string::npos);
}

TEST(Commands, AnalyzeFixture) {
  for (const double t2 : {kPi / 4, 1.0}) {
    auto c = load_config("preset:qubit-sigma-y");
    c.times = std::vector<double>{0.0, t2};
    const auto r = cmd_analyze(c).results;
    EXPECT_EQ(r.at("mu"), 2);
    EXPECT_TRUE(r.at("spanning").at("spans").get<bool>());
    EXPECT_EQ(r.at("injectivity").at("status"), "Injective");
    EXPECT_NEAR(r.at("det_lambda").get<double>(), std::pow(std::sin(t2), 2), 1e-12);
  }
}

TEST(Commands, AnalyzeTrivialAndNonInjective) {
  auto r = cmd_analyze(load_config(fixture("identity-qutrit"))).results;
  EXPECT_EQ(r.at("mu"), 1);
  EXPECT_FALSE(r.at("spanning").at("spans").get<bool>());

  r = cmd_analyze(load_config(fixture("diag-single-projector"))).results;
  EXPECT_EQ(r.at("mu"), 2);
  EXPECT_TRUE(r.at("spanning").at("spans").get<bool>());
  EXPECT_EQ(r.at("injectivity").at("status"), "NonInjective");
  EXPECT_EQ(r.at("injectivity").at("nullspace_dimension"), 2);
  EXPECT_TRUE(r.at("injectivity").at("witness").is_array());
}

TEST(Commands, SimulateGroundState) {
  const auto r = cmd_simulate(load_config(fixture("qubit-sigma-y-ground"))).results;
  const auto* e0 = projector_entry(r, "exact", "M1", 0);
  const auto* e1 = projector_entry(r, "exact", "M1", 1);
  const auto* f1 = projector_entry(r, "factored", "M1", 1);
  ASSERT_TRUE(e0 && e1 && f1);
  EXPECT_NEAR(e0->at("value").get<double>(), 0.2, 1e-12);
  EXPECT_NEAR(e1->at("value").get<double>(), 0.1, 1e-12);
  EXPECT_NEAR(f1->at("value").get<double>(), 0.5, 1e-12);
  EXPECT_EQ(e1->at("shots"), "exact");
}

TEST(Commands, SimulateWithShots) {
  auto c = load_config(fixture("qubit-sigma-y-ground"));
  c.shots = 1000000;
  c.seed = 7;
  const auto noisy = cmd_simulate(c).results.at("exact");
  c.shots.reset();
  const auto clean = cmd_simulate(c).results.at("exact");
  ASSERT_EQ(noisy.size(), clean.size());
  for (std::size_t n = 0; n < noisy.size(); ++n) {
    EXPECT_NEAR(noisy[n].at("value").get<double>(), clean[n].at("value").get<double>(), 0.005);
    EXPECT_EQ(noisy[n].at("shots"), 1000000);
  }
}

TEST(Commands, SimulateNeedsTruth) {
  auto c = load_config("preset:qubit-sigma-y");
  c.truth.reset();
  try {
    cmd_simulate(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    EXPECT_EQ(exit_code(e.kind()), 2);
  }
}

TEST(Commands, ReconstructRoundTrip) {
  const auto c = load_config("preset:qubit-sigma-y");
  const auto data = simulate_data(c, DataModel::Factored);
  const auto r = cmd_reconstruct(c, data).results;
  EXPECT_GT(r.at("fidelity_to_truth").get<double>(), 1 - 1e-8);
  EXPECT_EQ(r.at("method"), "paper-qubit-closed-form");
}

TEST(Commands, ReconstructExactDataFlagsDiscrepancy) {
  const auto c = load_config(fixture("qubit-sigma-y-ground"));
  const auto r = cmd_reconstruct(c, simulate_data(c, DataModel::Exact)).results;
  EXPECT_GT(r.at("diagnostics").at("model_discrepancy_max").get<double>(), 0.1);
}

TEST(Commands, ReconstructErrors) {
  auto c = load_config(fixture("qubit-sigma-y-singular"));
  try {
    cmd_reconstruct(c, simulate_data(c, DataModel::Factored));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularLambda);
  }
  c = load_config("preset:qubit-sigma-y");
  auto data = simulate_data(c, DataModel::Factored);
  data[1].time = 0.5;
  try {
    cmd_reconstruct(c, data);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DataMismatch);
  }
}

TEST(Commands, ValidateModelGroundState) {
  const auto r = cmd_validate_model(load_config(fixture("qubit-sigma-y-ground"))).results;
  const auto& m1 = r.at("projectors").at(0);
  EXPECT_EQ(m1.at("projector"), "M1");
  EXPECT_NEAR(m1.at("max").get<double>(), 0.4, 1e-10);
  const double at = m1.at("argmax_time").get<double>();
  EXPECT_TRUE(std::abs(at - kPi / 4) < 1e-12 || std::abs(at - 3 * kPi / 4) < 1e-12);
  const auto profile = m1.at("profile").get<std::vector<double>>();
  ASSERT_EQ(profile.size(), 101u);
  EXPECT_NEAR(profile[75], 0.4, 1e-10);
  for (std::size_t g = 0; g < profile.size(); ++g) {
    EXPECT_NEAR(profile[g], 0.4 * std::abs(std::sin(2 * kPi * static_cast<double>(g) / 100.0)), 1e-10);
  }
}

TEST(Commands, ValidateModelIdentityAndEigenstate) {
  auto r = cmd_validate_model(load_config(fixture("identity-qutrit"))).results;
  EXPECT_NEAR(r.at("max_discrepancy").get<double>(), 0.0, 1e-15);

  // Regression fixture: an eigenstate only acquires a phase, so both models agree everywhere.
  r = cmd_validate_model(load_config(fixture("qubit-sigma-y-eigenstate"))).results;
  for (const auto& p : r.at("projectors")) {
    for (double v : p.at("profile").get<std::vector<double>>()) EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

TEST(Report, RoundTrip) {
  const auto c = load_config("preset:qubit-sigma-y");
  for (const auto& report : {cmd_analyze(c), cmd_simulate(c), cmd_validate_model(c)}) {
    const auto text = dump(report_to_json(report));
    const auto back = report_from_json(json::parse(text));
    EXPECT_EQ(back, report);
    EXPECT_EQ(dump(report_to_json(back)), text);
    EXPECT_EQ(back.versions.at("schema"), kSchemaVersion);
  }
  EXPECT_THROW(report_from_json(json{{"command", "x"}}), Error);
}

TEST(Report, DeterministicAcrossRunsAndExecution) {
  auto c = load_config(fixture("qubit-sigma-y-exact-fit"));
  const auto data = simulate_data(c, DataModel::Exact);
  const auto a = dump(report_to_json(cmd_reconstruct(c, data, Execution::Parallel)));
  const auto b = dump(report_to_json(cmd_reconstruct(c, data, Execution::Serial)));
  EXPECT_EQ(a, b);
  EXPECT_EQ(dump(report_to_json(cmd_simulate(c, Execution::Serial))),
            dump(report_to_json(cmd_simulate(c, Execution::Parallel))));
}

TEST(ExitCodes, Distinct) {
  const std::vector<ErrorKind> kinds = {ErrorKind::ConfigError, ErrorKind::SingularLambda, ErrorKind::FrameDeficient,
                                        ErrorKind::NonConvergence, ErrorKind::DataMismatch};
  std::vector<int> codes;
  for (auto k : kinds) codes.push_back(exit_code(k));
  for (std::size_t i = 0; i < codes.size(); ++i) {
    EXPECT_NE(codes[i], 0);
    EXPECT_NE(codes[i], 1);
    for (std::size_t j = i + 1; j < codes.size(); ++j) EXPECT_NE(codes[i], codes[j]);
  }
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const char* env = std::getenv("STROBO_CLI");
    cli_ = env ? env : STROBO_CLI_PATH;
    dir_ = fs::temp_directory_path() / ("strobo_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override {
    if (!dir_.empty()) fs::remove_all(dir_);
  }

  int run(const std::string& args) {
    const std::string cmd = cli_ + " " + args + " 2>" + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string cli_;
  fs::path dir_;
};

TEST_F(Cli, EndToEndAndExitCodes) {
  const auto data = (dir_ / "data.json").string();
  const auto out = (dir_ / "report.json").string();
  ASSERT_EQ(run("simulate --config preset:qubit-sigma-y --data-model factored --data " + data + " --out " +
                (dir_ / "sim.json").string()),
            0);
  ASSERT_EQ(run("reconstruct --config preset:qubit-sigma-y --data " + data + " --out " + out), 0);
  const auto report = json::parse(read_file(out));
  EXPECT_GT(report.at("results").at("fidelity_to_truth").get<double>(), 1 - 1e-8);

  EXPECT_EQ(run("analyze --config " + (dir_ / "missing.json").string()), 2);
  EXPECT_EQ(run("reconstruct --config " + fixture("qubit-sigma-y-singular") + " --data " + data), 6);

  const auto sdata = (dir_ / "singular.json").string();
  ASSERT_EQ(run("simulate --config " + fixture("qubit-sigma-y-singular") + " --data-model factored --data " + sdata +
                " --out " + (dir_ / "s.json").string()),
            0);
  EXPECT_EQ(run("reconstruct --config " + fixture("qubit-sigma-y-singular") + " --data " + sdata), 3);

  const auto idata = (dir_ / "identity.json").string();
  ASSERT_EQ(run("simulate --config " + fixture("identity-qutrit") + " --data-model factored --data " + idata +
                " --out " + (dir_ / "i.json").string()),
            0);
  EXPECT_EQ(run("reconstruct --config " + fixture("identity-qutrit") + " --data " + idata), 4);

  // Contradictory data for the exact-fit mode.
  json bad = json::array();
  for (const char* l : {"M1", "M2"})
    for (double t : {0.0, 0.39269908169872414, 0.7853981633974483, 1.1780972450961724})
      bad.push_back({{"projector", l}, {"time", t}, {"value", t == 0.0 ? 1.0 : 0.0}, {"shots", "exact"}});
  const auto bpath = (dir_ / "bad.json").string();
  std::ofstream(bpath) << dump(bad);
  EXPECT_EQ(run("reconstruct --config " + fixture("qubit-sigma-y-exact-fit") + " --data " + bpath), 5);
}

TEST_F(Cli, ByteIdenticalReports) {
  for (const std::string cmd : {"analyze", "simulate", "validate-model"}) {
    const auto a = (dir_ / (cmd + "_a.json")).string();
    const auto b = (dir_ / (cmd + "_b.json")).string();
    ASSERT_EQ(run(cmd + " --config " + fixture("qubit-sigma-y-exact-fit") + " --seed 11 --out " + a), 0);
    ASSERT_EQ(run(cmd + " --config " + fixture("qubit-sigma-y-exact-fit") + " --seed 11 --serial --out " + b), 0);
    EXPECT_EQ(read_file(a), read_file(b)) << cmd;
    EXPECT_EQ(json::parse(read_file(a)).at("config").at("seed"), 11);
  }
}
